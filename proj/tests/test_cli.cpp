#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "s3kit/serialize.hpp"

using namespace s3kit;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;  // stdout + stderr, interleaved
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(S3KIT_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe)) r.out.append(buf, got);
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

// Value of a "name = value" stdout line; fails the test when absent.
std::string find_value(const std::string& out, const std::string& key) {
    std::string marker = key + " = ";
    std::size_t at = out.find(marker);
    if (at != 0) {
        // Must start a line, not occur mid-token.
        while (at != std::string::npos && out[at - 1] != '\n') at = out.find(marker, at + 1);
    }
    REQUIRE_MESSAGE(at != std::string::npos, "missing line '", marker, "...' in:\n", out);
    std::size_t end = out.find('\n', at);
    return out.substr(at + marker.size(), end - (at + marker.size()));
}

double find_number(const std::string& out, const std::string& key) {
    return std::strtod(find_value(out, key).c_str(), nullptr);
}

// Per-test scratch directory under the system temp root.
fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("s3kit_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string data_file(const std::string& name) {
    return (fs::path(S3KIT_DATA_DIR) / name).string();
}

}  // namespace

TEST_CASE("version and usage errors") {
    CHECK(run_cli("--version").out.find("1.0.0") != std::string::npos);
    CHECK(run_cli("--version").code == 0);
    CHECK(run_cli("--help").code == 0);

    RunResult none = run_cli("");
    CHECK(none.code == 1);
    CHECK(none.out.find("error: usage:") != std::string::npos);

    RunResult unknown = run_cli("frobnicate --x 1");
    CHECK(unknown.code == 1);
    CHECK(unknown.out.find("error: usage:") != std::string::npos);

    RunResult missing_required = run_cli("approx --step 0.01");
    CHECK(missing_required.code == 1);
    CHECK(missing_required.out.find("error: usage:") != std::string::npos);
}

TEST_CASE("approx builds the cubic chain exactly") {
    fs::path dir = scratch("approx");
    std::string net_path = (dir / "net.json").string();
    RunResult r = run_cli("approx --fn cubic_fig3 --interval 1 2 --step 0.01 --out " + net_path);
    REQUIRE_MESSAGE(r.code == 0, r.out);
    CHECK(find_value(r.out, "neurons") == "100");
    CHECK(find_number(r.out, "sup_error") <= 1e-9);

    S3ChainNet net = chain_from_json(read_json(net_path));
    CHECK(net.neurons.size() == 100);
    CHECK(net.domain[0] == 1.0);
    CHECK(net.domain[1] == 2.0);

    Csv curve = read_csv(net_path + ".curve.csv");
    CHECK(curve.header == std::vector<std::string>{"x", "target", "network"});
    CHECK(curve.rows.size() == 1001);

    json manifest = read_json(net_path + ".manifest.json");
    CHECK(manifest["kind"] == "run_manifest");
    CHECK(manifest["subcommand"] == "approx");
    CHECK(manifest["tool_version"] == "1.0.0");
    CHECK(manifest["parameters"]["step"].get<double>() == 0.01);
    CHECK(manifest["outputs"].size() == 2);
    CHECK(manifest["duration_seconds"].get<double>() >= 0.0);

    RunResult bad = run_cli("approx --fn no_such --out " + (dir / "x.json").string());
    CHECK(bad.code == 1);
    CHECK(bad.out.find("error: validation:") != std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical outputs") {
    fs::path dir = scratch("determinism");
    std::string a = (dir / "a.json").string();
    std::string b = (dir / "b.json").string();
    std::string args = "approx --fn sin1 --step 0.02 --out ";
    REQUIRE(run_cli(args + a).code == 0);
    REQUIRE(run_cli(args + b).code == 0);
    CHECK(read_text(a) == read_text(b));
    CHECK(read_text(a + ".curve.csv") == read_text(b + ".curve.csv"));
    // Manifests are excluded from the byte comparison: they time the run.
}

TEST_CASE("omega gen, check, rewire, enum") {
    fs::path dir = scratch("omega");
    RunResult gen = run_cli("omega gen --n 5 --seed 7");
    REQUIRE(gen.code == 0);
    RunResult gen2 = run_cli("omega gen --n 5 --seed 7");
    CHECK(gen.out == gen2.out);

    std::string topo_path = (dir / "topo.txt").string();
    REQUIRE(run_cli("omega gen --n 5 --seed 7 --out " + topo_path).code == 0);
    std::string line = gen.out.substr(0, gen.out.find('\n'));
    CHECK(read_text(topo_path) == line + "\n");
    json manifest = read_json(topo_path + ".manifest.json");
    CHECK(manifest["seed"].get<std::uint64_t>() == 7);

    RunResult ok = run_cli("omega check --topology I,0,1");
    CHECK(ok.code == 0);
    CHECK(ok.out.find("valid") != std::string::npos);
    CHECK(find_value(ok.out, "members") == "6");

    RunResult from_file = run_cli("omega check --file " + topo_path);
    CHECK(from_file.code == 0);

    RunResult invalid = run_cli("omega check --topology I,2,0");
    CHECK(invalid.code == 1);
    CHECK(invalid.out.find("violation:") != std::string::npos);
    CHECK(invalid.out.find("error: validation:") != std::string::npos);

    RunResult rewired = run_cli("omega rewire --topology I,0,1 --neuron 2 --parent I");
    CHECK(rewired.code == 0);
    CHECK(rewired.out.substr(0, rewired.out.find('\n')) == "I,0,I");
    CHECK(run_cli("omega rewire --topology I,0,1 --neuron 0 --parent 1").code == 1);
    CHECK(run_cli("omega rewire --topology I,0,1 --neuron 2 --parent Q").code == 1);

    RunResult enumerated = run_cli("omega enum --n 3");
    CHECK(enumerated.code == 0);
    // 6 members, one per line.
    std::size_t lines = 0;
    for (char c : enumerated.out) lines += c == '\n';
    CHECK(lines == 6);
    CHECK(enumerated.out.find("I,0,1") != std::string::npos);
    CHECK(enumerated.out.find("I,I,I") != std::string::npos);
}

TEST_CASE("omega equiv compares the member against the chain") {
    fs::path dir = scratch("equiv");
    std::string out = (dir / "member.json").string();
    RunResult r = run_cli("omega equiv --topology I,0,I,2 --fn cubic_fig3 --step 0.25 --out " + out);
    REQUIRE_MESSAGE(r.code == 0, r.out);
    CHECK(find_number(r.out, "sup_difference") <= 1e-9);
    CHECK(find_number(r.out, "sup_error") <= 1e-9);
    OmegaNet net = omega_from_json(read_json(out));
    CHECK(format_topology(net.topology) == "I,0,I,2");

    // Mismatch: 4 segments vs 3 neurons.
    CHECK(run_cli("omega equiv --topology I,0,1 --fn cubic_fig3 --step 0.25").code == 1);
}

TEST_CASE("spectra reports the star radius") {
    RunResult r = run_cli("spectra --topology I,I,I");
    REQUIRE(r.code == 0);
    CHECK(std::fabs(find_number(r.out, "rho") - std::sqrt(3.0)) <= 1e-9);
    CHECK(find_value(r.out, "is_star") == "true");
    CHECK(find_value(r.out, "is_tree") == "true");
    CHECK(find_value(r.out, "converged") == "true");
    CHECK(find_value(r.out, "vertices") == "4");
    CHECK(r.out.find("adjacency:") != std::string::npos);
    CHECK(r.out.find("0 1 1 1") != std::string::npos);
}

TEST_CASE("trees sweep emits the summary table") {
    fs::path dir = scratch("trees");
    std::string out = (dir / "sweep.csv").string();
    RunResult r = run_cli("trees sweep --min 3 --max 4 --out " + out);
    REQUIRE_MESSAGE(r.code == 0, r.out);
    CHECK(r.out.find("n,tree_count,max_rho") != std::string::npos);
    Csv csv = read_csv(out);
    REQUIRE(csv.rows.size() == 2);
    CHECK(csv.rows[0][0] == "3");
    CHECK(csv.rows[1][0] == "4");
    CHECK(csv.rows[1][1] == "16");
    CHECK(csv.rows[1][5] == "true");  // star_unique
    CHECK(csv.rows[1][6] == "true");  // all_rho_le_n_minus_1
    CHECK(run_cli("trees sweep --min 5 --max 4").code == 1);
}

TEST_CASE("ka build and eval") {
    fs::path dir = scratch("ka");
    std::string out = (dir / "bundle.json").string();
    RunResult built = run_cli("ka build --dec additive --n 2 --sigma 0.1 --step 0.02 --out " + out);
    REQUIRE_MESSAGE(built.code == 0, built.out);
    CHECK(find_value(built.out, "width") == "10");
    CHECK(find_number(built.out, "composite_error") <= 0.1);

    RunResult eval = run_cli("ka eval --net " + out + " --at 0.5,0.5 --at 1,1");
    REQUIRE(eval.code == 0);
    // Two lines, one value per point, each within the certified tolerance.
    double v0 = std::strtod(eval.out.c_str(), nullptr);
    std::size_t nl = eval.out.find('\n');
    double v1 = std::strtod(eval.out.c_str() + nl + 1, nullptr);
    CHECK(std::fabs(v0 - 0.5) <= 0.1);
    CHECK(std::fabs(v1 - 2.0) <= 0.1);

    CHECK(run_cli("ka eval --net " + out + " --at 0.5").code == 1);
    CHECK(run_cli("ka eval --net " + out + " --at 0.5,oops").code == 1);
    CHECK(run_cli("ka build --dec unknown --out " + out).code == 1);
}

TEST_CASE("bounds compare and eval") {
    fs::path dir = scratch("bounds");

    // Dense two-layer stack (n2 = n1 + d1) and a leading-column slim stack.
    json dense = json::array();
    dense.push_back(json::array({json::array({0.5, -0.25}), json::array({0.75, 1.0}),
                                 json::array({-0.5, 0.25})}));
    dense.push_back(json::array({json::array({0.3, -0.2, 0.1, 0.4, -0.6})}));
    json slim = json::array();
    slim.push_back(json::array({json::array({0.5}), json::array({0.75}), json::array({-0.5})}));
    slim.push_back(json::array({json::array({0.3, -0.2, 0.1})}));
    std::string dense_path = (dir / "dense.json").string();
    std::string slim_path = (dir / "slim.json").string();
    write_json_atomic(dense_path, dense);
    write_json_atomic(slim_path, slim);

    std::string report_path = (dir / "report.json").string();
    RunResult cmp = run_cli("bounds compare --dense " + dense_path + " --s3 " + slim_path +
                            " --samples 500 --gamma 1 --data-bound 1 --delta 0.05 --out " +
                            report_path);
    REQUIRE_MESSAGE(cmp.code == 0, cmp.out);
    CHECK(find_value(cmp.out, "all_verdicts_hold") == "true");
    CHECK(cmp.out.find("margin_bound") != std::string::npos);
    json report = read_json(report_path);
    CHECK(report["kind"] == "bound_report");
    CHECK(report["all_verdicts_hold"].get<bool>());

    // Profile evaluation against the frozen single-layer oracle.
    NormProfile p;
    LayerNorms l;
    l.spectral_bound = 1.0;
    l.two_one_bound = 1.0;
    l.frobenius_bound = 1.0;
    l.out_dim = 2;
    l.in_dim = 2;
    p.layers = {l};
    std::string profile_path = (dir / "profile.json").string();
    write_json_atomic(profile_path, profile_to_json(p));
    RunResult eval = run_cli("bounds eval --profile " + profile_path +
                             " --samples 100 --gamma 1 --data-bound 1 --delta 0.1 --dense-dims 2");
    REQUIRE_MESSAGE(eval.code == 0, eval.out);
    CHECK(find_number(eval.out, "bartlett_dense") ==
          doctest::Approx(2.7205754251477448).epsilon(1e-9));
    CHECK(find_number(eval.out, "bartlett_s3") ==
          doctest::Approx(2.7205754251477448).epsilon(1e-9));
    CHECK(find_number(eval.out, "dense_rademacher") == doctest::Approx(0.3).epsilon(1e-12));
    // L*p = 2 > 1, so the pacbayes variants compute rather than skip.
    CHECK(eval.out.find("chain_pacbayes = skipped") == std::string::npos);
}

TEST_CASE("train writes loss history and fitted curve") {
    fs::path dir = scratch("train");
    std::string prefix = (dir / "run").string();
    RunResult r = run_cli("train --layers 4 --lr 0.05 --epochs 20 --seed 1 --target tent"
                          " --sample-step 0.1 --out " + prefix);
    REQUIRE_MESSAGE(r.code == 0, r.out);
    CHECK(find_value(r.out, "diverged") == "false");
    CHECK(find_value(r.out, "epochs_run") == "20");

    Csv loss = read_csv(prefix + "_loss.csv");
    CHECK(loss.header == std::vector<std::string>{"epoch", "loss"});
    CHECK(loss.rows.size() == 20);
    Csv curve = read_csv(prefix + "_curve.csv");
    CHECK(curve.header == std::vector<std::string>{"x", "target", "fitted"});
    CHECK(curve.rows.size() == 11);  // step 0.1 on [0,1]

    json manifest = read_json(prefix + "_loss.csv.manifest.json");
    CHECK(manifest["subcommand"] == "train");
    CHECK(manifest["seed"].get<std::uint64_t>() == 1);

    // Same seed, same bytes.
    std::string again = (dir / "again").string();
    REQUIRE(run_cli("train --layers 4 --lr 0.05 --epochs 20 --seed 1 --target tent"
                    " --sample-step 0.1 --out " + again).code == 0);
    CHECK(read_text(again + "_loss.csv") == read_text(prefix + "_loss.csv"));
    CHECK(read_text(again + "_curve.csv") == read_text(prefix + "_curve.csv"));
}

TEST_CASE("ttest reproduces the fixture p-value") {
    RunResult r = run_cli("ttest --csv " + data_file("table1.csv") + " --cols III,IV");
    REQUIRE_MESSAGE(r.code == 0, r.out);
    CHECK(find_number(r.out, "p") == doctest::Approx(0.10065826013963329).epsilon(1e-9));
    CHECK(std::fabs(find_number(r.out, "p") - 0.1007) <= 5e-4);
    CHECK(find_number(r.out, "t") == doctest::Approx(-1.6826390874089818).epsilon(1e-9));

    CHECK(run_cli("ttest --csv " + data_file("table1.csv") + " --cols III").code == 1);
    CHECK(run_cli("ttest --csv " + data_file("table1.csv") + " --cols X,Y").code == 1);
}

TEST_CASE("I/O failures exit with code 2") {
    RunResult w = run_cli("approx --fn tent --out /nonexistent_dir_s3kit/net.json");
    CHECK(w.code == 2);
    CHECK(w.out.find("error: io:") != std::string::npos);

    RunResult miss = run_cli("ttest --csv /nonexistent_dir_s3kit/t.csv --cols A,B");
    CHECK(miss.code == 2);
    CHECK(miss.out.find("error: io:") != std::string::npos);
}
