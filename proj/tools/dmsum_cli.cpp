#include <CLI11.hpp>
#include <gmp.h>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dmsum/assembly.hpp"
#include "dmsum/lemmas.hpp"
#include "dmsum/sigma.hpp"

using namespace dmsum;
using json = nlohmann::json;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;
constexpr int exit_budget = 3;
constexpr int exit_format = 4;

constexpr const char* dmsum_version = "1.0.0";

std::string sha256_hex(std::string_view data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    std::ostringstream out;
    for (unsigned i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return out.str();
}

std::string file_sha256(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

std::string utc_now()
{
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char s[32];
    std::strftime(s, sizeof s, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return s;
}

// Accepts plain integers and exact scientific forms such as 1e6.
u64 parse_count(const std::string& text, const std::string& flag)
{
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw InvalidArgument(flag + ": not a number: " + text);
    }
    if (used != text.size() || !(v >= 0) || v > 9007199254740992.0 || v != std::floor(v))
        throw InvalidArgument(flag + ": expected a nonnegative integer, got " + text);
    return static_cast<u64>(v);
}

std::pair<u64, u64> parse_window(const std::string& text)
{
    const auto dots = text.find("..");
    if (dots == std::string::npos) throw InvalidArgument("--window: expected a..b, got " + text);
    const u64 lo = parse_count(text.substr(0, dots), "--window");
    const u64 hi = parse_count(text.substr(dots + 2), "--window");
    if (lo < 1 || hi < lo) throw InvalidArgument("--window: need 1 <= a <= b, got " + text);
    return {lo, hi};
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("write failed for " + path);
}

// Provenance of one invocation; the payload digest covers only the
// deterministic part of the report.
struct Run {
    std::string command;
    json config = json::object();
    json resources = json::object();
    json inputs = json::array();
    json outputs = json::array();
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    std::string started_at = utc_now();

    void add_input(const std::string& path) { inputs.push_back({{"path", path}, {"sha256", file_sha256(path)}}); }
    void add_output(const std::string& path) { outputs.push_back({{"path", path}, {"sha256", file_sha256(path)}}); }

    json manifest(const json& payload) const
    {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return {{"command", command},
                {"config", config},
                {"resources", resources},
                {"versions",
                 {{"dmsum", dmsum_version},
                  {"compiler", __VERSION__},
                  {"gmp", gmp_version},
                  {"openssl", OPENSSL_VERSION_TEXT},
                  {"cli11", CLI11_VERSION},
                  {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
                {"started_at", started_at},
                {"wall_seconds", wall},
                {"inputs", inputs},
                {"outputs", outputs},
                {"payload_sha256", sha256_hex(payload.dump())}};
    }
};

int emit(const Run& run, json payload, bool pass, const std::string& out_path)
{
    payload["pass"] = pass;
    const json report = {{"manifest", run.manifest(payload)}, {"payload", payload}};
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text(out_path, text);
        std::cout << (pass ? "PASS" : "FAIL") << " " << out_path << "\n";
    }
    return pass ? exit_pass : exit_fail;
}

// --- subcommands ------------------------------------------------------------

struct SieveArgs {
    std::string from = "1";
    std::string to;
    std::string csv;
    std::string out;
};

int run_sieve(Run& run, const SieveArgs& a, const Limits& lim)
{
    const u64 lo = parse_count(a.from, "--from");
    const u64 hi = parse_count(a.to, "--to");
    if (lo < 1 || hi < lo) throw InvalidArgument("sieve: need 1 <= from <= to");
    run.config = {{"from", lo}, {"to", hi}, {"csv", a.csv}};

    std::ofstream csv;
    if (!a.csv.empty()) {
        csv.open(a.csv, std::ios::binary);
        if (!csv) throw Error("cannot write " + a.csv);
        csv << "n,mu,phi,spf\n";
    }
    u64 squarefree = 0, primes = 0;
    long long mertens = 0;
    NeumaierSum m;
    const SegmentedSieve sieve(hi, lim);
    const u64 step = std::min(lim.segment_length, lim.max_segment);
    for (u64 s = lo; s <= hi;) {
        const u64 e = std::min(hi, s + step - 1);
        const auto b = sieve.block(s, e);
        for (u64 n = s; n <= e; ++n) {
            const int mu = b.mu_at(n);
            if (mu != 0) {
                ++squarefree;
                mertens += mu;
                m.add(mu / static_cast<double>(n));
            }
            if (n > 1 && b.spf_at(n) == n) ++primes;
            if (csv.is_open()) csv << n << ',' << mu << ',' << b.phi_at(n) << ',' << b.spf_at(n) << '\n';
        }
        if (e == hi) break;
        s = e + 1;
    }
    if (csv.is_open()) {
        csv.close();
        run.add_output(a.csv);
    }
    const u64 expected = squarefree_count(hi) - squarefree_count(lo - 1);
    json p = {{"from", lo},
              {"to", hi},
              {"count", hi - lo + 1},
              {"squarefree", squarefree},
              {"squarefree_expected", expected},
              {"primes", primes},
              {"sum_mu", mertens},
              {"sum_mu_over_n", m.value()}};
    return emit(run, p, squarefree == expected, a.out);
}

struct MertensArgs {
    std::string to;
    u64 modulus = 6;
    std::string table;
    std::string load;
    std::string out;
};

int run_mertens_table(Run& run, const MertensArgs& a, const Limits& lim)
{
    MertensTable t;
    if (!a.load.empty()) {
        run.add_input(a.load);
        t = MertensTable::load(a.load, lim);
    } else {
        if (a.to.empty()) throw InvalidArgument("mertens-table: --to or --load is required");
        t = MertensTable::build(parse_count(a.to, "--to"), a.modulus, lim);
    }
    run.config = {{"to", t.limit()}, {"modulus", t.modulus()}, {"table", a.table}, {"load", a.load}};
    if (!a.table.empty()) {
        t.save(a.table);
        run.add_output(a.table);
    }
    json samples = json::object();
    for (u64 x = 10; x <= t.limit(); x *= 10) samples[std::to_string(x)] = t.m(x);
    samples[std::to_string(t.limit())] = t.m(t.limit());
    const u64 probe = std::min<u64>(t.limit(), 10000);
    const double exact = mertens_exact(probe).get_d();
    const double gap = std::fabs(t.m(probe) - exact);
    json p = {{"limit", t.limit()},
              {"modulus", t.modulus()},
              {"residues", std::vector<u64>(t.residues().begin(), t.residues().end())},
              {"bytes", t.bytes()},
              {"m", samples},
              {"exact_probe", {{"x", probe}, {"abs_gap", gap}}}};
    return emit(run, p, gap <= 1e-12, a.out);
}

struct SigmaArgs {
    std::string to;
    std::vector<std::string> windows;
    std::optional<double> max_le;
    std::optional<double> min_ge;
    u64 shadow = 5000;
    u64 checkpoint_every = 0;
    std::string checkpoint;
    std::string resume;
    std::string trace;
    std::string table;
    std::string out;
};

int run_sigma_scan(Run& run, const SigmaArgs& a, const Limits& lim)
{
    const u64 X = parse_count(a.to, "--to");
    SigmaScanOptions opt;
    for (const auto& w : a.windows) opt.windows.push_back(parse_window(w));
    opt.shadow_limit = a.shadow;
    opt.store_values = false;
    opt.checkpoint_every = a.checkpoint_every;
    if ((!a.checkpoint.empty() || !a.trace.empty()) && a.checkpoint_every == 0)
        throw InvalidArgument("--checkpoint and --trace need --checkpoint-every");
    run.config = {{"to", X},
                  {"windows", a.windows},
                  {"max_le", a.max_le ? json(*a.max_le) : json(nullptr)},
                  {"min_ge", a.min_ge ? json(*a.min_ge) : json(nullptr)},
                  {"shadow", a.shadow},
                  {"checkpoint_every", a.checkpoint_every},
                  {"checkpoint", a.checkpoint},
                  {"resume", a.resume},
                  {"trace", a.trace},
                  {"table", a.table}};

    if (!a.resume.empty()) {
        run.add_input(a.resume);
        opt.resume = load_scan_state(a.resume);
        if (!a.windows.empty()) throw InvalidArgument("--window cannot be combined with --resume");
    }
    std::optional<MertensTable> table;
    std::string table_path = a.table;
    if (table_path.empty() && opt.resume) table_path = opt.resume->table_path;
    if (!table_path.empty() && std::ifstream(table_path).good()) {
        run.add_input(table_path);
        table = MertensTable::load(table_path, lim);
    } else {
        table = MertensTable::build(std::max<u64>(X - 1, 1), 6, lim);
        if (!table_path.empty()) {
            table->save(table_path);
            run.add_output(table_path);
        }
    }
    opt.table = &*table;

    std::ofstream trace;
    if (!a.trace.empty()) {
        trace.open(a.trace, std::ios::binary | (opt.resume ? std::ios::app : std::ios::trunc));
        if (!trace) throw Error("cannot write " + a.trace);
        if (!opt.resume) trace << "d,sigma,running_max_arg,running_max\n";
        trace << std::setprecision(17);
    }
    u64 last_logged = opt.resume ? opt.resume->d : 0;
    opt.on_checkpoint = [&](const SigmaScanState& s) {
        if (s.d == last_logged) return;
        last_logged = s.d;
        if (trace.is_open())
            trace << s.d << ',' << s.sum + s.compensation << ',' << s.overall.argmax << ',' << s.overall.max << '\n';
        if (!a.checkpoint.empty()) {
            SigmaScanState copy = s;
            copy.table_path = table_path;
            save_scan_state(copy, a.checkpoint);
        }
    };
    const auto tr = sigma_scan(X, opt, lim);
    if (trace.is_open()) {
        trace.close();
        run.add_output(a.trace);
    }
    if (!a.checkpoint.empty()) run.add_output(a.checkpoint);

    bool pass = tr.overall.min >= 0 && tr.drift_bound < 5e-4;
    json windows = json::array();
    for (const auto& w : tr.windows) {
        json e = to_json(w);
        bool ok = true;
        if (a.max_le) ok = ok && w.max <= *a.max_le;
        if (a.min_ge) ok = ok && w.min >= *a.min_ge;
        e["pass"] = ok;
        pass = pass && ok;
        windows.push_back(e);
    }
    json p = {{"X_max", X},
              {"first", tr.first},
              {"sigma_X", tr.final_state.sum + tr.final_state.compensation},
              {"overall", to_json(tr.overall)},
              {"windows", windows},
              {"shadow_limit", tr.shadow_limit},
              {"shadow_drift", tr.shadow_drift},
              {"drift_bound", tr.drift_bound}};
    return emit(run, p, pass, a.out);
}

struct LemmaArgs {
    std::string name;
    std::string limit;
    bool list = false;
    std::string out;
};

int run_verify_lemma(Run& run, const LemmaArgs& a, const Limits& lim)
{
    run.config = {{"name", a.name}, {"limit", a.limit}, {"list", a.list}};
    if (a.list) {
        json rows = json::array();
        for (const auto& t : lemma_registry())
            rows.push_back({{"name", t.name}, {"summary", t.summary}, {"default_limit", t.default_limit}});
        return emit(run, {{"lemmas", rows}}, true, a.out);
    }
    if (a.name.empty()) throw InvalidArgument("verify-lemma: a lemma name or --list is required");
    const auto& target = find_lemma(a.name);
    const u64 limit = a.limit.empty() ? target.default_limit : parse_count(a.limit, "--limit");
    run.config["limit"] = limit;
    const auto r = target.run(limit, lim);
    return emit(run, to_json(r), r.pass, a.out);
}

struct ConstantsArgs {
    std::string cutoff = std::to_string(default_prime_cutoff);
    bool check = false;
    std::string out;
};

int run_constants(Run& run, const ConstantsArgs& a)
{
    const u64 cutoff = parse_count(a.cutoff, "--cutoff");
    run.config = {{"cutoff", cutoff}, {"check", a.check}};
    json reg = constants_registry(cutoff);
    bool pass = true;
    if (a.check) {
        json checks = json::array();
        auto record = [&](const std::string& name, bool ok, double value, double target) {
            checks.push_back({{"name", name}, {"value", value}, {"target", target}, {"pass", ok}});
            pass = pass && ok;
        };
        const double A = reg["A"]["value"].get<double>();
        record("A within 5e-6", std::fabs(A - 0.428257) <= 5e-6, A, 0.428257);
        for (const char* family : {"H1", "Hbar_2_3"})
            for (const auto& [g, v] : reg[family].items())
                record(std::string(family) + ":" + g, v["upper"].get<double>() <= v["target_bound"].get<double>(),
                       v["upper"].get<double>(), v["target_bound"].get<double>());
        reg["checks"] = checks;
    }
    return emit(run, reg, pass, a.out);
}

struct BoundArgs {
    double x_min = 1.1e7;
    double ratio = 22.99;
    bool no_refine_30 = false;
    bool no_localize = false;
    unsigned budget = 25;
    std::optional<double> target;
    std::string out;
};

int run_bound(Run& run, const BoundArgs& a, const Limits& lim)
{
    AssemblyConfig cfg;
    cfg.x_min = a.x_min;
    cfg.ratio = a.ratio;
    cfg.refinement_30 = !a.no_refine_30;
    cfg.localization = !a.no_localize;
    cfg.enumeration_budget = a.budget;
    cfg.threads = lim.threads;
    run.config = {{"x_min", a.x_min},
                  {"ratio", a.ratio},
                  {"refinement_30", cfg.refinement_30},
                  {"localization", cfg.localization},
                  {"enumeration_budget", a.budget},
                  {"target", a.target ? json(*a.target) : json(nullptr)}};
    const auto r = theorem_bound(cfg);
    const bool pass = r.bound < 1 && (!a.target || r.bound <= *a.target);
    return emit(run, to_json(r), pass, a.out);
}

struct TableArgs {
    std::string scan_to = "1000000";
    std::string out;
};

int run_theorem_table(Run& run, const TableArgs& a, const Limits& lim)
{
    const u64 scan_to = parse_count(a.scan_to, "--scan-to");
    if (scan_to < 2) throw InvalidArgument("--scan-to must be at least 2");
    run.config = {{"scan_to", scan_to}};
    SigmaScanOptions opt;
    opt.windows = {{2, scan_to}};
    opt.store_values = false;
    const auto tr = sigma_scan(scan_to, opt, lim);
    const auto rows = theorem_table(tr.windows[0].max, scan_to, lim.threads);
    json out = json::array();
    bool pass = true;
    for (const auto& r : rows) {
        out.push_back(to_json(r));
        pass = pass && r.pass;
    }
    json p = {{"scan", {{"range", {2, scan_to}}, {"max", tr.windows[0].max}, {"argmax", tr.windows[0].argmax}}},
              {"rows", out}};
    return emit(run, p, pass, a.out);
}

void print_error(const char* kind, const std::string& message)
{
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Explicit bounds for the Moebius double sum over lcm"};
    app.require_subcommand(1);
    app.set_version_flag("--version", dmsum_version);
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    SieveArgs sv;
    auto* sieve = app.add_subcommand("sieve", "Sieve mu, phi and spf on a range");
    sieve->add_option("--from", sv.from, "First integer");
    sieve->add_option("--to", sv.to, "Last integer")->required();
    sieve->add_option("--csv", sv.csv, "Write n,mu,phi,spf rows");
    sieve->add_option("--out", sv.out, "Report file");

    MertensArgs mt;
    auto* mertens = app.add_subcommand("mertens-table", "Build or load a residue-class table of m(t)");
    mertens->add_option("--to", mt.to, "Table limit");
    mertens->add_option("--modulus", mt.modulus, "Residue modulus")->check(CLI::PositiveNumber);
    mertens->add_option("--table", mt.table, "Save the binary table here");
    mertens->add_option("--load", mt.load, "Load an existing binary table");
    mertens->add_option("--out", mt.out, "Report file");

    SigmaArgs sg;
    auto* sigma = app.add_subcommand("sigma-scan", "Scan Sigma(d) for d up to --to");
    sigma->add_option("--to", sg.to, "Last d")->required();
    sigma->add_option("--window", sg.windows, "Window a..b (repeatable)");
    sigma->add_option("--max-le", sg.max_le, "Require every window max <= value");
    sigma->add_option("--min-ge", sg.min_ge, "Require every window min >= value");
    sigma->add_option("--shadow", sg.shadow, "Exact shadow length");
    sigma->add_option("--checkpoint-every", sg.checkpoint_every, "Record interval");
    sigma->add_option("--checkpoint", sg.checkpoint, "Checkpoint file");
    sigma->add_option("--resume", sg.resume, "Resume from a checkpoint file");
    sigma->add_option("--trace", sg.trace, "CSV trace d,sigma,running_max_arg,running_max");
    sigma->add_option("--table", sg.table, "Mertens table file to load or create");
    sigma->add_option("--out", sg.out, "Report file");

    LemmaArgs lm;
    auto* lemma = app.add_subcommand("verify-lemma", "Run one lemma check");
    lemma->add_option("name", lm.name, "Lemma name");
    lemma->add_option("--limit,--dmax,--xmax", lm.limit, "Scan limit");
    lemma->add_flag("--list", lm.list, "List lemma targets");
    lemma->add_option("--out", lm.out, "Report file");

    ConstantsArgs ct;
    auto* constants = app.add_subcommand("constants", "Regenerate the constants registry");
    constants->add_option("--cutoff", ct.cutoff, "Prime cutoff");
    constants->add_flag("--check", ct.check, "Compare against the stated bounds");
    constants->add_option("--out", ct.out, "Report file");

    BoundArgs bd;
    auto* bound = app.add_subcommand("bound", "Assemble the bound for X >= x_min");
    bound->add_option("--x-min", bd.x_min, "Smallest X");
    bound->add_option("--ratio", bd.ratio, "x_min / D");
    bound->add_flag("--no-refine-30", bd.no_refine_30, "Use 2.18 for every delta");
    bound->add_flag("--no-localize", bd.no_localize, "Disable dyadic localization");
    bound->add_option("--budget", bd.budget, "Largest pi(j) enumerated");
    bound->add_option("--target", bd.target, "Require bound <= value");
    bound->add_option("--out", bd.out, "Report file");

    TableArgs tb;
    auto* table = app.add_subcommand("theorem-table", "All theorem rows");
    table->add_option("--scan-to", tb.scan_to, "Direct scan range for the first row");
    table->add_option("--out", tb.out, "Report file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_pass : exit_usage;
    }

    Run run;
    for (int i = 0; i < argc; ++i) run.command += (i ? " " : "") + std::string(argv[i]);
    Limits lim = Limits::from_environment();
    lim.threads = threads;
    run.resources = {{"threads", lim.threads}, {"memory_bytes", lim.memory_bytes}};

    try {
        if (*sieve) return run_sieve(run, sv, lim);
        if (*mertens) return run_mertens_table(run, mt, lim);
        if (*sigma) return run_sigma_scan(run, sg, lim);
        if (*lemma) return run_verify_lemma(run, lm, lim);
        if (*constants) return run_constants(run, ct);
        if (*bound) return run_bound(run, bd, lim);
        if (*table) return run_theorem_table(run, tb, lim);
    } catch (const BudgetExceeded& e) {
        print_error("budget", e.what());
        return exit_budget;
    } catch (const FormatError& e) {
        print_error("format", e.what());
        return exit_format;
    } catch (const InvalidArgument& e) {
        print_error("usage", e.what());
        return exit_usage;
    } catch (const std::exception& e) {
        print_error("failure", e.what());
        return exit_fail;
    }
    return exit_usage;
}
