// Runs the nvdac executable and checks exit codes, messages and outputs.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int rc{-1};
    std::string out;  // stdout and stderr together
};

Run nvdac(const std::string& args) {
    const std::string cmd = std::string(NVDAC_CLI_PATH) + " " + args + " 2>&1";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string fixture(const char* name) { return std::string(NVDAC_FIXTURES) + "/" + name; }

fs::path workdir(const std::string& name) {
    const fs::path p = fs::path(NVDAC_WORKDIR) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool contains(const std::string& s, const std::string& what) { return s.find(what) != std::string::npos; }

} // namespace

TEST_CASE("FID fixture gives T2n* between 60 and 80 us") {
    const Run r = nvdac("fit " + fixture("fid_0p6gpa.csv") + " --model damped_cosine --format json");
    REQUIRE(r.rc == 0);
    const auto j = nlohmann::json::parse(r.out);
    const double t2 = j["params"]["decay_time"]["value"];
    CHECK(t2 >= 60e-6);
    CHECK(t2 <= 80e-6);
    CHECK(j.contains("seed"));
}

TEST_CASE("aligned ODMR fixture fits four centers") {
    const Run r = nvdac("fit " + fixture("odmr_aligned_460g.csv") + " --model lorentzian:4 --format json");
    REQUIRE(r.rc == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["converged"] == true);
    int centers = 0;
    for (auto it = j["params"].begin(); it != j["params"].end(); ++it)
        if (it.key().rfind("center_", 0) == 0) ++centers;
    CHECK(centers == 4);
}

TEST_CASE("fit CSV output and seed") {
    const Run r = nvdac("--seed 17 fit " + fixture("fid_0p6gpa.csv") + " --model damped_cosine --format csv");
    REQUIRE(r.rc == 0);
    CHECK(contains(r.out, "decay_time"));
    CHECK(contains(r.out, "17"));
}

TEST_CASE("input errors exit with status 2") {
    const fs::path dir = workdir("errors");
    const Run missing = nvdac("--config " + (dir / "absent.cfg").string() + " fit " + fixture("fid_0p6gpa.csv") +
                              " --model damped_cosine");
    CHECK(missing.rc == 2);
    CHECK(contains(missing.out, "config not found"));

    const Run validate_missing = nvdac("validate-config " + (dir / "absent.cfg").string());
    CHECK(validate_missing.rc == 2);
    CHECK(contains(validate_missing.out, "config not found"));

    const Run bad_row = nvdac("fit " + write_file(dir / "bad.csv", "x,y,sigma\n1,2,0.1\n2,zz,0.1\n").string() +
                              " --model exponential");
    CHECK(bad_row.rc == 2);
    CHECK(contains(bad_row.out, "row 3"));

    const Run empty = nvdac("fit " + write_file(dir / "empty.csv", "").string() + " --model exponential");
    CHECK(empty.rc == 2);

    const Run unknown_key = nvdac("validate-config " + write_file(dir / "k.cfg", "noise.t1e = 2e-4\nnoise.t9 = 1\n").string());
    CHECK(unknown_key.rc == 2);
    CHECK(contains(unknown_key.out, "noise.t9"));

    const Run bad_value = nvdac("validate-config " + write_file(dir / "v.cfg", "noise.t2e_star = 1\n").string());
    CHECK(bad_value.rc == 2);
    CHECK(contains(bad_value.out, "noise.t2e_star"));

    const Run good = nvdac("validate-config " + write_file(dir / "ok.cfg", "noise.t1e = 2e-4\nrng_seed = 5\n").string());
    CHECK(good.rc == 0);

    CHECK(nvdac("fit").rc == 2);
    CHECK(nvdac("simulate --no-such-flag").rc == 2);
    CHECK(nvdac("frobnicate").rc == 2);
}

TEST_CASE("unknown figure id lists the valid ids") {
    const Run r = nvdac("reproduce 9x");
    CHECK(r.rc == 2);
    for (const char* id : {"2b", "2c", "3c", "3d", "4a", "4b", "4c"}) CHECK(contains(r.out, id));
}

TEST_CASE("pressure-series argument checks") {
    const fs::path dir = workdir("series_errors");
    const Run single = nvdac("pressure-series --pressures 0.6 --out " + dir.string());
    CHECK(single.rc == 2);
    CHECK(contains(single.out, "at least 3"));
    const Run range = nvdac("pressure-series --pressures 0.6,10,25 --out " + dir.string());
    CHECK(range.rc == 2);
    CHECK(contains(range.out, "range"));
}

TEST_CASE("pressure-series writes the trend") {
    const fs::path dir = workdir("series");
    const Run r = nvdac("--seed 3 pressure-series --pressures 0.6,8,16.6 --out " + dir.string());
    REQUIRE(r.rc == 0);
    CHECK(contains(r.out, "seed = 3"));
    CHECK(fs::exists(dir / "trend.csv"));
    CHECK(fs::exists(dir / "records.csv"));
    CHECK(contains(slurp(dir / "trend.csv"), "slope"));
}

TEST_CASE("simulate writes CSV and is reproducible") {
    const fs::path a = workdir("sim_a"), b = workdir("sim_b");
    const std::string args = " simulate --preset nmr_pulsed_ms0 --pressure 0.6 --set points=31 --out ";
    const Run ra = nvdac("--seed 11 --threads 1" + args + (a / "s.csv").string());
    const Run rb = nvdac("--seed 11 --threads 3" + args + (b / "s.csv").string());
    REQUIRE(ra.rc == 0);
    REQUIRE(rb.rc == 0);
    CHECK(contains(ra.out, "seed = 11"));
    CHECK(slurp(a / "s.csv") == slurp(b / "s.csv"));
    CHECK_FALSE(slurp(a / "s.csv").empty());
    const Run rc = nvdac("--seed 12 --threads 1" + args + (b / "s.csv").string());
    REQUIRE(rc.rc == 0);
    CHECK(slurp(a / "s.csv") != slurp(b / "s.csv"));
}
