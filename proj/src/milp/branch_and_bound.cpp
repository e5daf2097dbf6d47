#include <algorithm>
#include <cmath>
#include <queue>

#include "mesbench/core/errors.hpp"
#include "mesbench/milp/solver.hpp"

namespace mesbench::milp {

namespace {

struct BoundChange {
	int var;
	double lo, hi;
};

struct Node {
	double bound;
	int depth;
	std::size_t seq;
	std::vector<BoundChange> changes;
	Basis warm;
};

struct NodeOrder {
	bool operator()(const Node &a, const Node &b) const {
		// priority_queue pops the largest, so "less" means worse.
		if (a.bound != b.bound)
			return a.bound > b.bound;
		if (a.depth != b.depth)
			return a.depth < b.depth;
		return a.seq > b.seq;
	}
};

double rel_gap(double inc, double bound) { return (inc - bound) / std::max(1.0, std::abs(inc)); }

} // namespace

MilpSolution solve_milp(const MilpProblem &p, const MilpLimits &limits, const Tolerances &tol) {
	p.check();
	const auto &lp = p.base;
	SimplexEngine engine(lp, tol);
	MilpSolution out;

	std::vector<int> ints = p.int_vars;
	std::sort(ints.begin(), ints.end());
	ints.erase(std::unique(ints.begin(), ints.end()), ints.end());

	// Integer bounds are rounded inward once up front.
	std::vector<double> root_lo(lp.num_vars()), root_hi(lp.num_vars());
	for (std::size_t j = 0; j < lp.num_vars(); ++j) {
		root_lo[j] = lp.lo[j];
		root_hi[j] = lp.hi[j];
	}
	for (int j : ints) {
		root_lo[j] = std::ceil(root_lo[j] - tol.integrality);
		root_hi[j] = std::floor(root_hi[j] + tol.integrality);
		if (root_lo[j] > root_hi[j]) {
			out.status = Status::Infeasible;
			return out;
		}
		engine.set_var_bounds(j, root_lo[j], root_hi[j]);
	}

	auto apply = [&](const std::vector<BoundChange> &changes) {
		for (int j : ints)
			engine.set_var_bounds(j, root_lo[j], root_hi[j]);
		for (const auto &c : changes)
			engine.set_var_bounds(c.var, c.lo, c.hi);
	};

	auto most_fractional = [&](const std::vector<double> &x) {
		int best = -1;
		double best_frac = tol.integrality;
		for (int j : ints) {
			const double f = x[j] - std::floor(x[j]);
			const double dist = std::min(f, 1.0 - f);
			if (dist > best_frac + 1e-12) {
				best_frac = dist;
				best = j;
			}
		}
		return best;
	};

	double incumbent = kInf;
	auto offer = [&](const std::vector<double> &x, double obj) {
		if (obj < incumbent) {
			incumbent = obj;
			out.x = x;
			// snap integers exactly
			for (int j : ints)
				out.x[j] = std::round(out.x[j]);
		}
	};

	Status st = engine.solve();
	out.iterations = engine.iterations();
	out.node_count = 1;
	if (st == Status::Infeasible || st == Status::Unbounded) {
		out.status = st;
		if (st == Status::Unbounded) {
			out.objective = -kInf;
			out.bound = -kInf;
		}
		return out;
	}
	const Basis root_basis = engine.basis();
	const double root_obj = engine.objective();
	const std::vector<double> root_x = engine.primal();

	if (most_fractional(root_x) < 0) {
		offer(root_x, root_obj);
	} else if (limits.rounding_heuristic && !ints.empty()) {
		for (int mode = 0; mode < 3; ++mode) {
			std::vector<BoundChange> fix;
			fix.reserve(ints.size());
			for (int j : ints) {
				double v = mode == 0 ? std::round(root_x[j]) : mode == 1 ? std::ceil(root_x[j] - tol.integrality)
				                                                          : std::floor(root_x[j] + tol.integrality);
				v = std::clamp(v, root_lo[j], root_hi[j]);
				fix.push_back({j, v, v});
			}
			apply(fix);
			engine.set_basis(root_basis);
			if (engine.solve() == Status::Optimal)
				offer(engine.primal(), engine.objective());
		}
		apply({});
		out.iterations = engine.iterations();
	}

	std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
	std::size_t seq = 0;
	if (most_fractional(root_x) >= 0)
		open.push({root_obj, 0, seq++, {}, root_basis});

	bool hit_limit = false;
	while (!open.empty()) {
		if (incumbent < kInf && rel_gap(incumbent, open.top().bound) <= limits.gap_tol)
			break;
		if (out.node_count >= limits.max_nodes) {
			hit_limit = true;
			break;
		}
		Node node = open.top();
		open.pop();

		// Solve both children of this node.
		std::vector<double> x_parent;
		{
			apply(node.changes);
			engine.set_basis(node.warm);
			if (engine.solve() != Status::Optimal)
				continue;
			x_parent = engine.primal();
		}
		const int j = most_fractional(x_parent);
		if (j < 0) {
			offer(x_parent, engine.objective());
			continue;
		}
		const Basis parent_basis = engine.basis();
		const double v = x_parent[j];
		double cur_lo = root_lo[j], cur_hi = root_hi[j];
		for (const auto &c : node.changes)
			if (c.var == j) {
				cur_lo = c.lo;
				cur_hi = c.hi;
			}
		const BoundChange kids[2] = {{j, cur_lo, std::floor(v)}, {j, std::ceil(v), cur_hi}};
		for (const auto &kid : kids) {
			if (kid.lo > kid.hi)
				continue;
			auto changes = node.changes;
			changes.push_back(kid);
			apply(changes);
			engine.set_basis(parent_basis);
			Status cs;
			try {
				cs = engine.solve();
			} catch (const NumericalError &) {
				engine.set_basis(root_basis);
				cs = engine.solve();
			}
			++out.node_count;
			if (cs == Status::Unbounded) {
				out.status = Status::Unbounded;
				out.objective = -kInf;
				out.bound = -kInf;
				out.x.clear();
				return out;
			}
			if (cs != Status::Optimal)
				continue;
			const double obj = engine.objective();
			if (incumbent < kInf && rel_gap(incumbent, obj) <= limits.gap_tol)
				continue;
			const auto xc = engine.primal();
			if (most_fractional(xc) < 0) {
				offer(xc, obj);
				continue;
			}
			open.push({obj, node.depth + 1, seq++, std::move(changes), engine.basis()});
		}
	}
	out.iterations = engine.iterations();

	double bound = incumbent;
	if (!open.empty())
		bound = std::min(bound, open.top().bound);
	if (incumbent == kInf) {
		out.status = hit_limit ? Status::GapLimit : Status::Infeasible;
		out.bound = open.empty() ? kInf : open.top().bound;
		return out;
	}
	out.objective = incumbent;
	out.bound = bound;
	out.gap = std::max(0.0, rel_gap(incumbent, bound));
	out.status = (hit_limit && out.gap > limits.gap_tol) ? Status::GapLimit : Status::Optimal;
	return out;
}

} // namespace mesbench::milp
