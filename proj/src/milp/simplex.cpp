#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "mesbench/core/errors.hpp"
#include "mesbench/milp/solver.hpp"

namespace mesbench::milp {

namespace {

enum : std::int8_t { kBasic = 0, kAtLower = 1, kAtUpper = 2, kFreeZero = 3 };

struct Eta {
	int row;
	double pivot;
	std::vector<int> idx; // excludes row
	std::vector<double> val;
};

} // namespace

struct SimplexEngine::Impl {
	Tolerances tol;
	int n = 0; // structurals
	int m = 0; // rows == logicals
	std::vector<int> col_start, row_idx;
	std::vector<double> col_val;
	std::vector<double> cost, lb, ub, x;
	double offset = 0.0;

	std::vector<int> head;
	std::vector<int> pos; // basis row of each column, -1 when nonbasic
	std::vector<std::int8_t> status;

	Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
	bool factored = false;
	std::vector<Eta> etas;
	std::size_t iters = 0;
	Status last = Status::Infeasible;

	Eigen::VectorXd work, work2;

	explicit Impl(const LpProblem &p, const Tolerances &t) : tol(t) {
		p.check();
		n = static_cast<int>(p.num_vars());
		m = static_cast<int>(p.num_rows());
		offset = p.offset;
		// CSC of A.
		std::vector<int> counts(n, 0);
		for (const auto &r : p.rows)
			for (const auto &term : r.terms)
				++counts[term.var];
		col_start.assign(n + 1, 0);
		for (int j = 0; j < n; ++j)
			col_start[j + 1] = col_start[j] + counts[j];
		row_idx.resize(col_start[n]);
		col_val.resize(col_start[n]);
		std::vector<int> fill(col_start.begin(), col_start.end() - 1);
		for (int i = 0; i < m; ++i)
			for (const auto &term : p.rows[i].terms) {
				row_idx[fill[term.var]] = i;
				col_val[fill[term.var]] = term.coef;
				++fill[term.var];
			}
		const int total = n + m;
		cost.assign(total, 0.0);
		lb.assign(total, 0.0);
		ub.assign(total, 0.0);
		x.assign(total, 0.0);
		for (int j = 0; j < n; ++j) {
			cost[j] = p.c[j];
			lb[j] = p.lo[j];
			ub[j] = p.hi[j];
		}
		for (int i = 0; i < m; ++i) {
			const double b = p.rhs[i];
			switch (p.row_sense[i]) {
			case RowSense::le:
				lb[n + i] = -kInf;
				ub[n + i] = b;
				break;
			case RowSense::ge:
				lb[n + i] = b;
				ub[n + i] = kInf;
				break;
			case RowSense::eq:
				lb[n + i] = b;
				ub[n + i] = b;
				break;
			}
		}
		status.assign(total, kAtLower);
		pos.assign(total, -1);
		head.resize(m);
		for (int j = 0; j < n; ++j)
			place_nonbasic(j);
		for (int i = 0; i < m; ++i) {
			head[i] = n + i;
			pos[n + i] = i;
			status[n + i] = kBasic;
		}
		work.resize(m);
		work2.resize(m);
	}

	void place_nonbasic(int j) {
		if (status[j] == kAtUpper && std::isfinite(ub[j])) {
			x[j] = ub[j];
			return;
		}
		if (std::isfinite(lb[j])) {
			status[j] = kAtLower;
			x[j] = lb[j];
		} else if (std::isfinite(ub[j])) {
			status[j] = kAtUpper;
			x[j] = ub[j];
		} else {
			status[j] = kFreeZero;
			x[j] = 0.0;
		}
	}

	void refactor() {
		etas.clear();
		factored = true;
		if (m == 0)
			return;
		std::vector<Eigen::Triplet<double>> trip;
		trip.reserve(static_cast<std::size_t>(m) * 4);
		for (int r = 0; r < m; ++r) {
			const int j = head[r];
			if (j >= n) {
				trip.emplace_back(j - n, r, -1.0);
			} else {
				for (int k = col_start[j]; k < col_start[j + 1]; ++k)
					trip.emplace_back(row_idx[k], r, col_val[k]);
			}
		}
		Eigen::SparseMatrix<double> b(m, m);
		b.setFromTriplets(trip.begin(), trip.end());
		b.makeCompressed();
		lu.analyzePattern(b);
		lu.factorize(b);
		if (lu.info() != Eigen::Success)
			throw NumericalError("simplex: basis matrix is singular");
	}

	void ftran(Eigen::VectorXd &v) {
		if (m == 0)
			return;
		v = lu.solve(v);
		for (const auto &e : etas) {
			const double zr = v[e.row];
			if (zr == 0.0)
				continue;
			v[e.row] = zr * e.pivot;
			for (std::size_t k = 0; k < e.idx.size(); ++k)
				v[e.idx[k]] += e.val[k] * zr;
		}
	}

	void btran(Eigen::VectorXd &v) {
		if (m == 0)
			return;
		for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
			double s = v[it->row] * it->pivot;
			for (std::size_t k = 0; k < it->idx.size(); ++k)
				s += it->val[k] * v[it->idx[k]];
			v[it->row] = s;
		}
		v = lu.transpose().solve(v);
	}

	void load_column(int j, Eigen::VectorXd &v) const {
		v.setZero();
		if (j >= n) {
			v[j - n] = -1.0;
			return;
		}
		for (int k = col_start[j]; k < col_start[j + 1]; ++k)
			v[row_idx[k]] += col_val[k]; // repeated terms in a row add up
	}

	void compute_basic_values() {
		if (m == 0)
			return;
		work.setZero();
		for (int j = 0; j < n; ++j) {
			if (status[j] == kBasic || x[j] == 0.0)
				continue;
			for (int k = col_start[j]; k < col_start[j + 1]; ++k)
				work[row_idx[k]] -= col_val[k] * x[j];
		}
		for (int i = 0; i < m; ++i)
			if (status[n + i] != kBasic)
				work[i] += x[n + i];
		ftran(work);
		for (int r = 0; r < m; ++r)
			x[head[r]] = work[r];
	}

	double reduced_cost(int j, const Eigen::VectorXd &y, bool phase1) const {
		const double cj = phase1 ? 0.0 : cost[j];
		if (j >= n)
			return cj + y[j - n];
		double s = cj;
		for (int k = col_start[j]; k < col_start[j + 1]; ++k)
			s -= col_val[k] * y[row_idx[k]];
		return s;
	}

	std::size_t iteration_cap() const {
		return tol.max_iterations ? tol.max_iterations : 50 * static_cast<std::size_t>(n + m) + 1000;
	}

	Status solve() {
		if (!factored)
			refactor();
		compute_basic_values();
		const double ftol = tol.primal_feasibility;
		const double dtol = tol.optimality;
		std::size_t degenerate = 0;
		bool bland = false;
		bool fresh = true; // factorization and x_B recomputed since the last pivot
		std::size_t local_iters = 0;
		Eigen::VectorXd y(m), alpha(m);

		for (;;) {
			if (etas.size() >= tol.refactor_interval) {
				refactor();
				compute_basic_values();
				fresh = true;
			}
			if (++local_iters > iteration_cap())
				throw NumericalError("simplex: iteration limit reached");

			bool phase1 = false;
			for (int r = 0; r < m; ++r) {
				const int j = head[r];
				double cb = 0.0;
				if (x[j] < lb[j] - ftol)
					cb = -1.0;
				else if (x[j] > ub[j] + ftol)
					cb = 1.0;
				if (cb != 0.0)
					phase1 = true;
				y[r] = cb;
			}
			if (!phase1)
				for (int r = 0; r < m; ++r)
					y[r] = cost[head[r]];
			btran(y);

			// Pricing.
			int q = -1;
			double best = 0.0, dq = 0.0;
			const int total = n + m;
			for (int j = 0; j < total; ++j) {
				const auto st = status[j];
				if (st == kBasic || lb[j] == ub[j])
					continue;
				const double d = reduced_cost(j, y, phase1);
				double score = 0.0;
				if (st == kAtLower && d < -dtol)
					score = -d;
				else if (st == kAtUpper && d > dtol)
					score = d;
				else if (st == kFreeZero && std::abs(d) > dtol)
					score = std::abs(d);
				if (score <= 0.0)
					continue;
				if (bland) {
					q = j;
					dq = d;
					break;
				}
				if (score > best) {
					best = score;
					q = j;
					dq = d;
				}
			}

			if (q < 0) {
				if (!fresh) {
					refactor();
					compute_basic_values();
					fresh = true;
					continue;
				}
				return phase1 ? Status::Infeasible : Status::Optimal;
			}

			const double dir = dq < 0.0 ? 1.0 : -1.0;
			load_column(q, alpha);
			ftran(alpha);

			// Ratio test over basic variables; x_B changes at rate -dir * alpha.
			struct Cand {
				int r;
				double ratio;
				double target;
			};
			double harris = kInf;
			auto limit_of = [&](int r, double rate, double slack, double &target) -> double {
				const int j = head[r];
				const double xv = x[j];
				if (rate < 0.0) {
					if (xv > ub[j] + ftol) {
						target = ub[j];
						return (xv - ub[j] + slack) / -rate;
					}
					if (xv >= lb[j] - ftol && std::isfinite(lb[j])) {
						target = lb[j];
						return (xv - lb[j] + slack) / -rate;
					}
				} else if (rate > 0.0) {
					if (xv < lb[j] - ftol) {
						target = lb[j];
						return (lb[j] - xv + slack) / rate;
					}
					if (xv <= ub[j] + ftol && std::isfinite(ub[j])) {
						target = ub[j];
						return (ub[j] - xv + slack) / rate;
					}
				}
				return kInf;
			};

			int leave = -1;
			double theta = kInf, leave_target = 0.0;
			if (!bland) {
				for (int r = 0; r < m; ++r) {
					if (std::abs(alpha[r]) <= tol.pivot)
						continue;
					double tgt;
					harris = std::min(harris, limit_of(r, -dir * alpha[r], ftol, tgt));
				}
				double best_piv = 0.0;
				for (int r = 0; r < m; ++r) {
					if (std::abs(alpha[r]) <= tol.pivot)
						continue;
					double tgt = 0.0;
					const double ratio = limit_of(r, -dir * alpha[r], 0.0, tgt);
					if (std::isfinite(ratio) && ratio <= harris && std::abs(alpha[r]) > best_piv) {
						best_piv = std::abs(alpha[r]);
						leave = r;
						theta = std::max(0.0, ratio);
						leave_target = tgt;
					}
				}
			} else {
				for (int r = 0; r < m; ++r) {
					if (std::abs(alpha[r]) <= tol.pivot)
						continue;
					double tgt = 0.0;
					const double ratio = std::max(0.0, limit_of(r, -dir * alpha[r], 0.0, tgt));
					if (ratio < theta - 1e-12 || (std::abs(ratio - theta) <= 1e-12 && leave >= 0 && head[r] < head[leave])) {
						theta = ratio;
						leave = r;
						leave_target = tgt;
					}
				}
			}

			const double span = ub[q] - lb[q];
			const bool can_flip = status[q] != kFreeZero && std::isfinite(span);
			if (leave < 0 && !can_flip) {
				if (phase1)
					throw NumericalError("simplex: unbounded ray in the feasibility phase");
				return Status::Unbounded;
			}
			if (can_flip && (leave < 0 || span <= theta)) {
				theta = span;
				for (int r = 0; r < m; ++r)
					x[head[r]] -= dir * theta * alpha[r];
				status[q] = status[q] == kAtLower ? kAtUpper : kAtLower;
				x[q] = status[q] == kAtLower ? lb[q] : ub[q];
				++iters;
				fresh = false;
				degenerate = 0;
				bland = false;
				continue;
			}

			if (std::abs(alpha[leave]) < tol.pivot)
				throw NumericalError("simplex: pivot below tolerance");

			for (int r = 0; r < m; ++r)
				x[head[r]] -= dir * theta * alpha[r];
			x[q] += dir * theta;

			const int out = head[leave];
			x[out] = leave_target;
			pos[out] = -1;
			if (lb[out] == ub[out])
				status[out] = kAtLower;
			else
				status[out] = leave_target == ub[out] ? kAtUpper : kAtLower;
			head[leave] = q;
			pos[q] = leave;
			status[q] = kBasic;

			Eta e;
			e.row = leave;
			e.pivot = 1.0 / alpha[leave];
			for (int r = 0; r < m; ++r) {
				if (r == leave || std::abs(alpha[r]) <= tol.drop)
					continue;
				e.idx.push_back(r);
				e.val.push_back(-alpha[r] * e.pivot);
			}
			etas.push_back(std::move(e));
			++iters;
			fresh = false;

			if (theta <= 1e-12) {
				if (++degenerate >= tol.degenerate_before_bland)
					bland = true;
			} else {
				degenerate = 0;
				bland = false;
			}
		}
	}
};

SimplexEngine::SimplexEngine(const LpProblem &p, const Tolerances &tol) : impl_(std::make_unique<Impl>(p, tol)) {}
SimplexEngine::~SimplexEngine() = default;
SimplexEngine::SimplexEngine(SimplexEngine &&) noexcept = default;
SimplexEngine &SimplexEngine::operator=(SimplexEngine &&) noexcept = default;

Status SimplexEngine::solve() {
	impl_->last = impl_->solve();
	return impl_->last;
}

void SimplexEngine::set_var_bounds(int j, double lo, double hi) {
	auto &s = *impl_;
	s.lb[j] = lo;
	s.ub[j] = hi;
	if (s.status[j] != kBasic)
		s.place_nonbasic(j);
}

double SimplexEngine::var_lo(int j) const { return impl_->lb[j]; }
double SimplexEngine::var_hi(int j) const { return impl_->ub[j]; }

std::vector<double> SimplexEngine::primal() const { return {impl_->x.begin(), impl_->x.begin() + impl_->n}; }

std::vector<double> SimplexEngine::duals() const {
	auto &s = *impl_;
	Eigen::VectorXd y(s.m);
	for (int r = 0; r < s.m; ++r)
		y[r] = s.cost[s.head[r]];
	s.btran(y);
	return {y.data(), y.data() + s.m};
}

double SimplexEngine::objective() const {
	double v = impl_->offset;
	for (int j = 0; j < impl_->n; ++j)
		v += impl_->cost[j] * impl_->x[j];
	return v;
}

std::size_t SimplexEngine::iterations() const { return impl_->iters; }

Basis SimplexEngine::basis() const { return {impl_->head, impl_->status}; }

void SimplexEngine::set_basis(const Basis &b) {
	auto &s = *impl_;
	if (b.head.size() != static_cast<std::size_t>(s.m) || b.status.size() != s.status.size())
		throw ShapeError("simplex: basis dimension mismatch");
	s.head = b.head;
	s.status = b.status;
	std::fill(s.pos.begin(), s.pos.end(), -1);
	for (int r = 0; r < s.m; ++r)
		s.pos[s.head[r]] = r;
	for (std::size_t j = 0; j < s.status.size(); ++j)
		if (s.status[j] != kBasic)
			s.place_nonbasic(static_cast<int>(j));
	s.factored = false;
}

MilpSolution solve_lp(const LpProblem &p, const Tolerances &tol) {
	SimplexEngine engine(p, tol);
	MilpSolution sol;
	sol.status = engine.solve();
	sol.iterations = engine.iterations();
	sol.node_count = 1;
	if (sol.status == Status::Optimal) {
		sol.x = engine.primal();
		sol.objective = engine.objective();
		sol.bound = sol.objective;
		sol.gap = 0.0;
	} else if (sol.status == Status::Unbounded) {
		sol.objective = -kInf;
		sol.bound = -kInf;
	}
	return sol;
}

} // namespace mesbench::milp
