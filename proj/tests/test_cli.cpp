#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

std::string cli_path() {
    const char* p = std::getenv("BHATT_CLI");
    REQUIRE_MESSAGE(p != nullptr, "BHATT_CLI must point at the CLI binary");
    return p;
}

RunResult run_cmd(const std::string& cmd) {
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    char buf[4096];
    size_t n = 0;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) res.out.append(buf, n);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

RunResult run(const std::string& args, bool merge_stderr = false) {
    return run_cmd(cli_path() + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null"));
}

std::string scratch(const std::string& name) {
    return "/tmp/bhatt_cli_" + std::to_string(getpid()) + "_" + name;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_quad2(const std::string& path) {
    std::ofstream out(path);
    out << "# theta0=0.6 order=2\n0 0.36 1.2 2\n1 0.64 -1.2 -2\n";
}

} // namespace

TEST_CASE("bounds: qubit scenario") {
    auto res = run("bounds --scenario qubit --lambda 0.25 --theta0 0.1 --order 2");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("kind: quantum") != std::string::npos);
    CHECK(res.out.find("25") != std::string::npos);
    CHECK(res.out.find("11743.8") != std::string::npos);
}

TEST_CASE("bounds: trivial second order for Bernoulli") {
    auto res = run("bounds --scenario bernoulli --theta0 0.5 --order 2");
    CHECK(res.exit_code == 0);
    // order-2 row repeats the order-1 value with effective order 1
    CHECK(res.out.find("2      finite     0.25          1") != std::string::npos);
}

TEST_CASE("bounds: strict mode exits 2 on divergence") {
    const std::string model = scratch("quad2.tsv");
    write_quad2(model);
    auto strict = run("bounds --model-file " + model + " --order 2 --strict");
    CHECK(strict.exit_code == 2);
    CHECK(strict.out.find("divergent") != std::string::npos);
    auto lax = run("bounds --model-file " + model + " --order 2");
    CHECK(lax.exit_code == 0);
    std::remove(model.c_str());
}

TEST_CASE("bounds: invalid configuration exits 3") {
    CHECK(run("bounds --scenario not-a-model --order 2").exit_code == 3);
    CHECK(run("bounds --order 2").exit_code == 3);  // no scenario, no file
    CHECK(run("bounds --scenario qubit --order 0").exit_code == 3);
    CHECK(run("nonsense").exit_code == 3);
    CHECK(run("bounds --scenario qubit --lambda 1.5").exit_code == 3);
}

TEST_CASE("exists: verdicts match bound statuses") {
    const std::string model = scratch("quad2b.tsv");
    write_quad2(model);
    auto res = run("exists --model-file " + model + " --order 2");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("0      solvable") != std::string::npos);
    CHECK(res.out.find("1      solvable") != std::string::npos);
    CHECK(res.out.find("2      unsolvable") != std::string::npos);
    std::remove(model.c_str());

    auto qubit = run("exists --scenario qubit --lambda 0.25 --order 2");
    CHECK(qubit.exit_code == 0);
    CHECK(qubit.out.find("unsolvable") == std::string::npos);
}

TEST_CASE("scan: singleton grid produces one row per estimator") {
    auto res = run("scan --scenario bernoulli --theta0 0.5 --order 1 --grid 0.5:0.5:1");
    CHECK(res.exit_code == 0);
    int rows = 0;
    std::istringstream ss(res.out);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.rfind("0.5,", 0) == 0) ++rows;
    }
    CHECK(rows == 1);
}

TEST_CASE("scan: identical runs give byte-identical CSV") {
    const std::string csv1 = scratch("scan1.csv");
    const std::string csv2 = scratch("scan2.csv");
    const std::string args =
        "scan --scenario mach-zehnder --r 400 --theta0 0.005 --order 2 --out ";
    CHECK(run(args + csv1).exit_code == 0);
    CHECK(run(args + csv2).exit_code == 0);
    const std::string a = slurp(csv1);
    const std::string b = slurp(csv2);
    REQUIRE_FALSE(a.empty());
    CHECK(a == b);
    CHECK(a.rfind("theta,estimator,bias,variance,mse,bound_cr,bound_bh\n", 0) == 0);
    std::remove(csv1.c_str());
    std::remove(csv2.c_str());
}

TEST_CASE("scan: multithreaded output matches single-threaded") {
    const std::string csv1 = scratch("thr1.csv");
    const std::string csv2 = scratch("thr4.csv");
    const std::string base = "scan --scenario qubit --lambda 0.25 --theta0 0.1 --order 2 ";
    CHECK(run(base + "--threads 1 --out " + csv1).exit_code == 0);
    CHECK(run(base + "--threads 4 --out " + csv2).exit_code == 0);
    CHECK(slurp(csv1) == slurp(csv2));
    std::remove(csv1.c_str());
    std::remove(csv2.c_str());
}

TEST_CASE("scan: rejects tabulated files") {
    const std::string model = scratch("quad2c.tsv");
    write_quad2(model);
    CHECK(run("scan --model-file " + model + " --order 1").exit_code == 3);
    std::remove(model.c_str());
}

TEST_CASE("config file supplies defaults, flags override") {
    const std::string cfg = scratch("cfg.ini");
    {
        std::ofstream out(cfg);
        out << "scenario=qubit\nlambda=0.25\ntheta0=0.1\norder=2\n";
    }
    auto from_cfg = run("--config " + cfg + " bounds");
    CHECK(from_cfg.exit_code == 0);
    CHECK(from_cfg.out.find("lambda=0.25") != std::string::npos);

    auto overridden = run("--config " + cfg + " bounds --lambda 0.4");
    CHECK(overridden.exit_code == 0);
    CHECK(overridden.out.find("lambda=0.4") != std::string::npos);

    // same via the environment variable
    auto via_env = run_cmd("BHATT_CONFIG=" + cfg + " " + cli_path() + " bounds 2>/dev/null");
    CHECK(via_env.exit_code == 0);
    CHECK(via_env.out.find("lambda=0.25") != std::string::npos);
    std::remove(cfg.c_str());
}

TEST_CASE("quantum model files run through the quantum pipeline") {
    const std::string path = scratch("diag.qst");
    {
        // diag(0.3, 0.7) with d rho = diag(1, -1): F_Q = 1/p + 1/(1-p)
        std::ofstream out(path);
        out << "# quantum N=2 theta0=0.3 order=1\n";
        out << "0.3 0 0 0\n0 0 0.7 0\n";
        out << "1 0 0 0\n0 0 -1 0\n";
    }
    auto res = run("bounds --model-file " + path + " --order 1");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("kind: quantum") != std::string::npos);
    // 1 / F_Q = 1 / (1/0.3 + 1/0.7) = 0.21
    CHECK(res.out.find("0.21") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("stdout carries the table, stderr the diagnostics") {
    auto merged = run("bounds --scenario mach-zehnder --r 5000 --theta0 0.02 --order 1", true);
    auto clean = run("bounds --scenario mach-zehnder --r 5000 --theta0 0.02 --order 1", false);
    CHECK(merged.out.find("small-angle") != std::string::npos);
    CHECK(clean.out.find("small-angle") == std::string::npos);
    CHECK(clean.out.find("kind: classical") != std::string::npos);
}
