#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "mesbench/core/errors.hpp"
#include "mesbench/milp/solver.hpp"
#include "support/milp_oracle.hpp"

using namespace mesbench;
using namespace mesbench::milp;
using Catch::Approx;

namespace {

constexpr double kExact = 1e-7;

LpProblem two_var_lp() {
	LpProblem p;
	const int x = p.add_var(0, kInf, -1, "x");
	const int y = p.add_var(0, kInf, -1, "y");
	p.add_row({{x, 1}, {y, 2}}, RowSense::le, 4);
	p.add_row({{x, 3}, {y, 1}}, RowSense::le, 6);
	return p;
}

MilpLimits exact_limits() { return {1000000, 0.0, true}; }

} // namespace

TEST_CASE("LP: single bounded variable", "[milp][lp]") {
	LpProblem p;
	const int x = p.add_var(0, kInf, -1);
	p.add_row({{x, 1}}, RowSense::le, 1);
	const auto s = solve_lp(p);
	REQUIRE(s.status == Status::Optimal);
	CHECK(std::abs(s.x[0] - 1.0) < kExact);
	CHECK(std::abs(s.objective + 1.0) < kExact);
}

TEST_CASE("LP: two-variable vertex", "[milp][lp]") {
	const auto s = solve_lp(two_var_lp());
	REQUIRE(s.status == Status::Optimal);
	CHECK(std::abs(s.x[0] - 8.0 / 5.0) < kExact);
	CHECK(std::abs(s.x[1] - 6.0 / 5.0) < kExact);
	CHECK(std::abs(s.objective + 14.0 / 5.0) < kExact);
}

TEST_CASE("LP: contradictory rows are infeasible", "[milp][lp]") {
	LpProblem p;
	const int x = p.add_var(-kInf, kInf, 0);
	p.add_row({{x, 1}}, RowSense::ge, 2);
	p.add_row({{x, 1}}, RowSense::le, 1);
	CHECK(solve_lp(p).status == Status::Infeasible);
}

TEST_CASE("LP: unbounded direction is reported", "[milp][lp]") {
	LpProblem p;
	const int x = p.add_var(0, kInf, -1);
	const int y = p.add_var(0, kInf, 0);
	p.add_row({{x, 1}, {y, -1}}, RowSense::le, 1);
	CHECK(solve_lp(p).status == Status::Unbounded);
}

TEST_CASE("LP: free variables, equalities and offset", "[milp][lp]") {
	LpProblem p;
	const int x = p.add_var(-kInf, kInf, 1);
	const int y = p.add_var(-kInf, kInf, 2);
	p.add_row({{x, 1}, {y, 1}}, RowSense::eq, 3);
	p.add_row({{x, 1}, {y, -1}}, RowSense::eq, 1);
	p.offset = 10.0;
	const auto s = solve_lp(p);
	REQUIRE(s.status == Status::Optimal);
	CHECK(s.x[0] == Approx(2.0));
	CHECK(s.x[1] == Approx(1.0));
	CHECK(s.objective == Approx(14.0));
}

TEST_CASE("LP: malformed problems are rejected", "[milp][lp]") {
	LpProblem p;
	p.add_var(1, 0, 0);
	CHECK_THROWS_AS(p.check(), std::invalid_argument);
	LpProblem q;
	q.add_var(0, 1, 0);
	q.add_row({{3, 1.0}}, RowSense::le, 1);
	CHECK_THROWS_AS(q.check(), std::invalid_argument);
}

TEST_CASE("LP agrees with vertex enumeration on tiny instances", "[milp][lp][oracle]") {
	std::mt19937_64 rng(2024);
	auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
	int feasible = 0;
	for (int k = 0; k < 300; ++k) {
		LpProblem p;
		const int n = uni(1, 3), m = uni(1, 4);
		for (int j = 0; j < n; ++j) {
			const double lo = uni(-4, 1);
			p.add_var(lo, lo + uni(1, 6), uni(-5, 5));
		}
		for (int i = 0; i < m; ++i) {
			std::vector<Term> t;
			for (int j = 0; j < n; ++j)
				if (const int a = uni(-3, 3); a != 0)
					t.push_back({j, static_cast<double>(a)});
			if (t.empty())
				t.push_back({0, 1.0});
			const int s = uni(0, 5);
			p.add_row(t, s < 3 ? RowSense::le : s < 5 ? RowSense::ge : RowSense::eq, uni(-4, 4));
		}
		const auto ref = oracle::enumerate_vertices(p);
		const auto s = solve_lp(p);
		INFO("instance " << k);
		if (!ref.feasible) {
			REQUIRE(s.status == Status::Infeasible);
			continue;
		}
		++feasible;
		REQUIRE(s.status == Status::Optimal);
		REQUIRE(std::abs(s.objective - ref.objective) < 1e-7 * std::max(1.0, std::abs(ref.objective)));
		REQUIRE(verify_solution(p, s.x, 1e-7).ok);
	}
	CHECK(feasible > 100);
}

TEST_CASE("LP duals certify optimality", "[milp][lp][duality]") {
	// min c'x, Ax >= b, x >= 0 with positive data: feasible and bounded
	std::mt19937_64 rng(77);
	std::uniform_real_distribution<double> u(0.1, 5.0);
	for (int k = 0; k < 60; ++k) {
		const int n = 2 + k % 7, m = 1 + k % 5;
		LpProblem p;
		for (int j = 0; j < n; ++j)
			p.add_var(0, kInf, u(rng));
		for (int i = 0; i < m; ++i) {
			std::vector<Term> t;
			for (int j = 0; j < n; ++j)
				t.push_back({j, std::floor(u(rng))});
			t.push_back({i % n, 1.0});
			p.add_row(t, RowSense::ge, u(rng));
		}
		SimplexEngine eng(p);
		REQUIRE(eng.solve() == Status::Optimal);
		const auto y = eng.duals();
		double dual_obj = 0.0;
		for (int i = 0; i < m; ++i) {
			REQUIRE(y[i] >= -1e-9);
			dual_obj += y[i] * p.rhs[i];
		}
		for (int j = 0; j < n; ++j) {
			double aty = 0.0;
			for (int i = 0; i < m; ++i)
				for (const auto &t : p.rows[i].terms)
					if (t.var == j)
						aty += t.coef * y[i];
			REQUIRE(aty <= p.c[j] + 1e-9);
		}
		REQUIRE(std::abs(eng.objective() - dual_obj) < 1e-6);
	}
}

TEST_CASE("MILP: binary knapsack", "[milp][bnb]") {
	MilpProblem p;
	const int a = p.base.add_var(0, 1, -5);
	const int b = p.base.add_var(0, 1, -4);
	p.base.add_row({{a, 6}, {b, 4}}, RowSense::le, 8);
	p.int_vars = {a, b};
	const auto s = solve_milp(p, exact_limits());
	REQUIRE(s.status == Status::Optimal);
	CHECK(s.x[0] == Approx(1.0));
	CHECK(s.x[1] == Approx(0.0).margin(1e-9));
	CHECK(-s.objective == Approx(5.0));
}

TEST_CASE("MILP: integral relaxation stops at the root", "[milp][bnb]") {
	MilpProblem p;
	const int a = p.base.add_var(0, 1, -1);
	const int b = p.base.add_var(0, 1, -1);
	p.base.add_row({{a, 1}, {b, 1}}, RowSense::le, 2);
	p.int_vars = {a, b};
	const auto s = solve_milp(p);
	REQUIRE(s.status == Status::Optimal);
	CHECK(s.node_count == 1);
}

TEST_CASE("MILP: a binary pinned to one half is infeasible", "[milp][bnb]") {
	MilpProblem p;
	const int a = p.base.add_var(0, 1, 0);
	p.base.add_row({{a, 1}}, RowSense::eq, 0.5);
	p.int_vars = {a};
	CHECK(solve_milp(p).status == Status::Infeasible);
}

TEST_CASE("MILP: node limit returns the incumbent with a gap", "[milp][bnb]") {
	std::mt19937_64 rng(5);
	MilpProblem p;
	std::vector<Term> row;
	for (int j = 0; j < 30; ++j) {
		const double w = std::uniform_int_distribution<int>(10, 60)(rng);
		p.int_vars.push_back(p.base.add_var(0, 1, -(w + std::uniform_int_distribution<int>(0, 9)(rng))));
		row.push_back({j, w});
	}
	p.base.add_row(row, RowSense::le, 301.5);
	const auto s = solve_milp(p, {3, 0.0, true});
	CHECK(s.node_count <= 3);
	if (s.status == Status::GapLimit) {
		CHECK(s.gap > 0.0);
		if (s.has_solution())
			CHECK(verify_solution(p, s.x).ok);
	}
	const auto full = solve_milp(p, exact_limits());
	REQUIRE(full.status == Status::Optimal);
	CHECK(full.objective <= s.objective + 1e-9);
}

TEST_CASE("MILP agrees with enumeration on random instances", "[milp][bnb][oracle]") {
	std::mt19937_64 rng(99);
	for (int k = 0; k < 60; ++k) {
		const auto p = oracle::random_milp(rng);
		const auto ref = oracle::enumerate_milp(p);
		const auto s = solve_milp(p, exact_limits());
		INFO("instance " << k);
		if (!ref.feasible) {
			REQUIRE(s.status == Status::Infeasible);
			continue;
		}
		REQUIRE(s.status == Status::Optimal);
		REQUIRE(std::abs(s.objective - ref.objective) < 1e-6);
		REQUIRE(verify_solution(p, s.x).ok);
	}
}

TEST_CASE("bound changes re-solve from the previous basis", "[milp][engine]") {
	LpProblem p = two_var_lp();
	SimplexEngine eng(p);
	REQUIRE(eng.solve() == Status::Optimal);
	eng.set_var_bounds(0, 0, 1);
	REQUIRE(eng.solve() == Status::Optimal);
	LpProblem q = p;
	q.hi[0] = 1;
	const auto fresh = solve_lp(q);
	CHECK(eng.objective() == Approx(fresh.objective));
	CHECK(eng.var_hi(0) == 1.0);
	const auto x = eng.primal();
	CHECK(x[0] == Approx(1.0));
	CHECK(x[1] == Approx(1.5));
}

TEST_CASE("verifier flags violations", "[milp][verify]") {
	MilpProblem p;
	const int a = p.base.add_var(0, 2, 1);
	const int b = p.base.add_var(0, 1, 1);
	p.base.add_row({{a, 1}, {b, 1}}, RowSense::ge, 1);
	p.int_vars = {a};
	CHECK(verify_solution(p, {1.0, 0.0}).ok);
	const auto row = verify_solution(p, {0.0, 0.5});
	CHECK_FALSE(row.ok);
	CHECK(row.max_row_violation == Approx(0.5));
	const auto integ = verify_solution(p, {0.5, 0.5});
	CHECK_FALSE(integ.ok);
	CHECK(integ.max_integrality_violation == Approx(0.5));
	const auto bound = verify_solution(p, {3.0, 0.0});
	CHECK_FALSE(bound.ok);
	CHECK(bound.objective == Approx(3.0));
}

TEST_CASE("text dump round trip", "[milp][format]") {
	std::mt19937_64 rng(8);
	for (int k = 0; k < 20; ++k) {
		auto p = oracle::random_milp(rng);
		p.base.offset = 0.1 * k;
		p.base.hi[0] = kInf;
		std::ostringstream a;
		write_lp(a, p);
		std::istringstream in(a.str());
		const auto back = read_lp(in);
		std::ostringstream b;
		write_lp(b, back);
		REQUIRE(a.str() == b.str());
		REQUIRE(back.int_vars == p.int_vars);
	}
	std::istringstream bad("mesbench-lp 1\nvars x\n");
	CHECK_THROWS_AS(read_lp(bad), ParseError);
	std::istringstream wrong("something else\n");
	CHECK_THROWS_AS(read_lp(wrong), ParseError);
}

TEST_CASE("degenerate problems terminate", "[milp][lp]") {
	// many redundant rows through the optimal vertex
	LpProblem p;
	const int x = p.add_var(0, kInf, -1);
	const int y = p.add_var(0, kInf, -1);
	for (int k = 1; k <= 40; ++k)
		p.add_row({{x, static_cast<double>(k)}, {y, static_cast<double>(k)}}, RowSense::le, 2.0 * k);
	p.add_row({{x, 1}}, RowSense::le, 1);
	p.add_row({{y, 1}}, RowSense::le, 1);
	const auto s = solve_lp(p);
	REQUIRE(s.status == Status::Optimal);
	CHECK(s.objective == Approx(-2.0));
}
