#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace mesbench::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { le, eq, ge };

struct Term {
	int var;
	double coef;
};

struct Row {
	std::vector<Term> terms;
};

// min c'x + offset  s.t.  rows (<=, =, >=) rhs,  lo <= x <= hi.
struct LpProblem {
	std::vector<double> c;
	std::vector<Row> rows;
	std::vector<RowSense> row_sense;
	std::vector<double> rhs;
	std::vector<double> lo, hi;
	std::vector<std::string> var_names; // optional, same length as c when present
	std::vector<std::string> row_names; // optional
	double offset = 0.0;

	int add_var(double lower, double upper, double cost, std::string name = {});
	int add_row(std::vector<Term> terms, RowSense sense, double rhs, std::string name = {});
	std::size_t num_vars() const { return c.size(); }
	std::size_t num_rows() const { return rows.size(); }
	std::string var_name(std::size_t j) const;
	std::string row_name(std::size_t i) const;
	// Throws std::invalid_argument on inconsistent dimensions, lo > hi or bad indices.
	void check() const;
};

struct MilpProblem {
	LpProblem base;
	std::vector<int> int_vars;

	void check() const;
};

enum class Status { Optimal, Infeasible, Unbounded, GapLimit };

std::string to_string(Status s);

struct MilpSolution {
	Status status = Status::Infeasible;
	std::vector<double> x;
	double objective = kInf;
	double bound = -kInf; // best proven lower bound
	double gap = kInf;    // (objective - bound) / max(1, |objective|)
	std::size_t node_count = 0;
	std::size_t iterations = 0;

	bool has_solution() const { return !x.empty(); }
};

// Every solver tolerance in one place.
struct Tolerances {
	double primal_feasibility = 1e-9;
	double optimality = 1e-9;
	double pivot = 1e-11;
	double integrality = 1e-6;
	double drop = 1e-14; // entries below this are dropped from eta vectors
	std::size_t degenerate_before_bland = 1000;
	std::size_t refactor_interval = 100;
	std::size_t max_iterations = 0; // 0 = 50 * (rows + cols) + 1000
};

struct MilpLimits {
	std::size_t max_nodes = 100000;
	double gap_tol = 1e-6;
	bool rounding_heuristic = true;
};

struct Verification {
	bool ok = false;
	double max_row_violation = 0.0;
	double max_bound_violation = 0.0;
	double max_integrality_violation = 0.0;
	double objective = 0.0;
};

// Independent re-check of a candidate point against every row, bound and
// integrality requirement.
Verification verify_solution(const MilpProblem &p, const std::vector<double> &x, double tol = 1e-6);
Verification verify_solution(const LpProblem &p, const std::vector<double> &x, double tol = 1e-6);

// Plain-text LP-style dump/restore. Numbers are written with 17 significant
// digits so a round trip is exact.
void write_lp(std::ostream &out, const MilpProblem &p);
MilpProblem read_lp(std::istream &in);

} // namespace mesbench::milp
