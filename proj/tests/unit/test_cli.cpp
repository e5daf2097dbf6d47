#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "mesbench/core/config.hpp"

namespace fs = std::filesystem;
using mesbench::cli::run;

namespace {

fs::path scratch(const std::string &name) {
	const fs::path p = fs::temp_directory_path() / ("mesbench_cli_test_" + name);
	fs::remove_all(p);
	return p;
}

std::string slurp(const fs::path &p) {
	std::ifstream in(p, std::ios::binary);
	std::ostringstream s;
	s << in.rdbuf();
	return s.str();
}

std::vector<std::string> csv_files(const fs::path &dir) {
	std::vector<std::string> out;
	for (const auto &e : fs::directory_iterator(dir))
		if (e.path().extension() == ".csv")
			out.push_back(e.path().filename().string());
	std::sort(out.begin(), out.end());
	return out;
}

} // namespace

TEST_CASE("usage errors exit 1 and write nothing", "[cli]") {
	const auto out = scratch("usage");
	CHECK(run({"simulate", "--bogus", "--out", out.string()}) == 1);
	CHECK(run({"frobnicate"}) == 1);
	CHECK(run({}) == 1);
	CHECK(run({"simulate", "--case", "case9", "--out", out.string()}) == 1);
	CHECK(run({"simulate", "--controller", "agent", "--out", out.string()}) == 1);
	CHECK(run({"mpc-run", "--horizon", "10", "--control", "20", "--out", out.string()}) == 1);
	CHECK(run({"evaluate", "--out", out.string()}) == 1);
	CHECK_FALSE(fs::exists(out));
	CHECK(run({"--help"}) == 0);
	CHECK(run({"--version"}) == 0);
}

TEST_CASE("runtime failures exit 2", "[cli]") {
	const auto out = scratch("runtime");
	const auto bad = scratch("bad_cfg");
	fs::create_directories(bad);
	std::ofstream(bad / "x.cfg") << "{ broken";
	CHECK(run({"simulate", "--config", (bad / "x.cfg").string(), "--out", out.string()}) == 2);
}

TEST_CASE("data-gen and simulate are byte-reproducible", "[cli][determinism]") {
	const auto a = scratch("det_a"), b = scratch("det_b");
	for (const auto &d : {a, b}) {
		REQUIRE(run({"data-gen", "--case", "case2", "--days", "3", "--seed", "4", "--out", (d / "data").string()}) == 0);
		REQUIRE(run({"simulate", "--case", "case2", "--controller", "random", "--days", "1", "--seed", "4", "--out",
		             (d / "sim").string()}) == 0);
	}
	for (const char *sub : {"data", "sim"}) {
		const auto files = csv_files(a / sub);
		REQUIRE_FALSE(files.empty());
		CHECK(files == csv_files(b / sub));
		for (const auto &f : files)
			CHECK(slurp(a / sub / f) == slurp(b / sub / f));
	}
}

TEST_CASE("manifest lists every artifact with its hash", "[cli][manifest]") {
	const auto out = scratch("manifest");
	REQUIRE(run({"simulate", "--controller", "zero", "--days", "1", "--out", out.string()}) == 0);
	const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
	CHECK(m.at("command").get<std::string>().find("simulate") != std::string::npos);
	CHECK(m.at("tool_version") == mesbench::cli::kVersion);
	REQUIRE(m.at("artifacts").size() >= 2);
	for (const auto &a : m.at("artifacts"))
		CHECK(a.at("sha256") == mesbench::cli::sha256_file(out / a.at("file").get<std::string>()));
}

TEST_CASE("sha256 of a known string", "[cli][manifest]") {
	const auto dir = scratch("sha");
	fs::create_directories(dir);
	std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
	CHECK(mesbench::cli::sha256_file(dir / "abc.txt") ==
	      "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("mpc-run writes a reproducible solve log", "[cli][mpc]") {
	const auto a = scratch("mpc_a"), b = scratch("mpc_b");
	for (const auto &d : {a, b})
		REQUIRE(run({"mpc-run", "--horizon", "48", "--control", "24", "--days", "1", "--out", d.string()}) == 0);
	CHECK(slurp(a / "solves.csv") == slurp(b / "solves.csv"));
	CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
	CHECK(fs::exists(a / "solve_times.csv"));
}

TEST_CASE("short training runs repeat exactly", "[cli][train]") {
	const auto a = scratch("train_a"), b = scratch("train_b"), h = scratch("hyper");
	fs::create_directories(h);
	std::ofstream(h / "h.json") << R"({"n_steps": 64, "nminibatches": 2, "noptepochs": 2})";
	for (const auto &d : {a, b})
		REQUIRE(run({"train", "ppo", "--steps", "256", "--eval-every", "128", "--hyper", (h / "h.json").string(),
		             "--out", d.string()}) == 0);
	CHECK(slurp(a / "curve.csv") == slurp(b / "curve.csv"));
	CHECK(slurp(a / "agent_ppo_seed1.txt") == slurp(b / "agent_ppo_seed1.txt"));

	const auto ev = scratch("eval");
	REQUIRE(run({"evaluate", "--agent", (a / "agent_ppo_seed1.txt").string(), "--weeks", "1", "--out",
	             ev.string()}) == 0);
	CHECK(fs::exists(ev / "evaluation.csv"));

	const auto svg = scratch("plot");
	fs::create_directories(svg);
	REQUIRE(run({"plot", "curve", "--in", (a / "curve.csv").string(), "--out", (svg / "c.svg").string()}) == 0);
	CHECK(slurp(svg / "c.svg").rfind("<svg", 0) == 0);
	CHECK(run({"plot", "curve", "--in", (a / "curve.csv").string(), "--out", (a / "curve.csv").string()}) == 1);
}

TEST_CASE("plots render CSV artifacts", "[cli][plot]") {
	std::istringstream csv("step,grid_el_mw,chp_el_mw\n0,1.5,2\n1,-0.5,2.5\n2,0,3\n");
	std::ostringstream svg;
	mesbench::cli::plot_dispatch_svg(csv, svg);
	CHECK(svg.str().find("<polyline") != std::string::npos);
	CHECK(svg.str().find("grid_el_mw") != std::string::npos);
	std::istringstream empty("");
	std::ostringstream sink;
	CHECK_THROWS(mesbench::cli::plot_dispatch_svg(empty, sink));
}

TEST_CASE("data directory override picks up preset files", "[cli][config]") {
	const auto root = scratch("datadir");
	fs::create_directories(root / "presets");
	mesbench::MesConfig cfg = mesbench::case1_config();
	cfg.gas_price = 4.2e-5;
	std::ofstream(root / "presets" / "case1.cfg") << mesbench::dump_config(cfg);
	const auto out = scratch("datadir_out");
	::setenv("MESBENCH_DATA_DIR", root.c_str(), 1);
	const int rc = run({"data-gen", "--days", "1", "--out", out.string()});
	::unsetenv("MESBENCH_DATA_DIR");
	REQUIRE(rc == 0);
	const auto back = mesbench::parse_config(slurp(out / "config.json"));
	CHECK(back.gas_price == 4.2e-5);

	// flags beat the preset
	const auto out2 = scratch("datadir_out2");
	::setenv("MESBENCH_DATA_DIR", root.c_str(), 1);
	const int rc2 = run({"data-gen", "--days", "1", "--gas-price", "30", "--out", out2.string()});
	::unsetenv("MESBENCH_DATA_DIR");
	REQUIRE(rc2 == 0);
	CHECK(mesbench::parse_config(slurp(out2 / "config.json")).gas_price == 3e-5);
}
