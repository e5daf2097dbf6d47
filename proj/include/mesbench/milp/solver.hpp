#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "mesbench/milp/problem.hpp"

namespace mesbench::milp {

// Snapshot of a simplex basis, used to restart from a previous solve.
struct Basis {
	std::vector<int> head;            // basic column per row
	std::vector<std::int8_t> status;  // per column, see SimplexEngine
	bool empty() const { return head.empty(); }
};

// Bounded primal simplex over [A -I][x; s] = 0 with bounds on x and on the row
// activities s. The basis is kept LU-factored (sparse LU plus product-form
// eta updates). Bounds can be changed between solves; the next solve restarts
// from the last basis.
class SimplexEngine {
public:
	explicit SimplexEngine(const LpProblem &p, const Tolerances &tol = {});
	~SimplexEngine();
	SimplexEngine(SimplexEngine &&) noexcept;
	SimplexEngine &operator=(SimplexEngine &&) noexcept;

	Status solve();

	void set_var_bounds(int j, double lo, double hi);
	double var_lo(int j) const;
	double var_hi(int j) const;

	std::vector<double> primal() const; // structural values
	std::vector<double> duals() const;  // row duals y (c_B B^-1); sign follows the min objective
	double objective() const;
	std::size_t iterations() const;

	Basis basis() const;
	void set_basis(const Basis &b);

private:
	struct Impl;
	std::unique_ptr<Impl> impl_;
};

MilpSolution solve_lp(const LpProblem &p, const Tolerances &tol = {});

// Best-first branch-and-bound on LP relaxations, most-fractional branching.
MilpSolution solve_milp(const MilpProblem &p, const MilpLimits &limits = {}, const Tolerances &tol = {});

} // namespace mesbench::milp
