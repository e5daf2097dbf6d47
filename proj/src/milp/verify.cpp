#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mesbench/milp/problem.hpp"

namespace mesbench::milp {

int LpProblem::add_var(double lower, double upper, double cost, std::string name) {
	c.push_back(cost);
	lo.push_back(lower);
	hi.push_back(upper);
	if (!name.empty() || !var_names.empty()) {
		var_names.resize(c.size() - 1);
		var_names.push_back(std::move(name));
	}
	return static_cast<int>(c.size() - 1);
}

int LpProblem::add_row(std::vector<Term> terms, RowSense sense, double b, std::string name) {
	rows.push_back({std::move(terms)});
	row_sense.push_back(sense);
	rhs.push_back(b);
	if (!name.empty() || !row_names.empty()) {
		row_names.resize(rows.size() - 1);
		row_names.push_back(std::move(name));
	}
	return static_cast<int>(rows.size() - 1);
}

std::string LpProblem::var_name(std::size_t j) const {
	if (j < var_names.size() && !var_names[j].empty())
		return var_names[j];
	return "x" + std::to_string(j);
}

std::string LpProblem::row_name(std::size_t i) const {
	if (i < row_names.size() && !row_names[i].empty())
		return row_names[i];
	return "r" + std::to_string(i);
}

void LpProblem::check() const {
	const std::size_t n = c.size();
	if (lo.size() != n || hi.size() != n)
		throw std::invalid_argument("lp: bound vectors do not match the number of variables");
	if (row_sense.size() != rows.size() || rhs.size() != rows.size())
		throw std::invalid_argument("lp: row sense/rhs vectors do not match the number of rows");
	if (!var_names.empty() && var_names.size() > n)
		throw std::invalid_argument("lp: more variable names than variables");
	for (std::size_t j = 0; j < n; ++j) {
		if (std::isnan(lo[j]) || std::isnan(hi[j]) || std::isnan(c[j]))
			throw std::invalid_argument("lp: NaN in variable " + var_name(j));
		if (lo[j] > hi[j])
			throw std::invalid_argument("lp: lower bound above upper bound for " + var_name(j));
		if (lo[j] == kInf || hi[j] == -kInf)
			throw std::invalid_argument("lp: empty domain for " + var_name(j));
	}
	for (std::size_t i = 0; i < rows.size(); ++i) {
		if (!std::isfinite(rhs[i]))
			throw std::invalid_argument("lp: non-finite right-hand side in " + row_name(i));
		for (const auto &t : rows[i].terms) {
			if (t.var < 0 || static_cast<std::size_t>(t.var) >= n)
				throw std::invalid_argument("lp: bad variable index in " + row_name(i));
			if (!std::isfinite(t.coef))
				throw std::invalid_argument("lp: non-finite coefficient in " + row_name(i));
		}
	}
}

void MilpProblem::check() const {
	base.check();
	for (int j : int_vars)
		if (j < 0 || static_cast<std::size_t>(j) >= base.num_vars())
			throw std::invalid_argument("milp: bad integer variable index");
}

std::string to_string(Status s) {
	switch (s) {
	case Status::Optimal:
		return "Optimal";
	case Status::Infeasible:
		return "Infeasible";
	case Status::Unbounded:
		return "Unbounded";
	case Status::GapLimit:
		return "GapLimit";
	}
	return "?";
}

Verification verify_solution(const LpProblem &p, const std::vector<double> &x, double tol) {
	Verification v;
	if (x.size() != p.num_vars())
		return v;
	for (std::size_t j = 0; j < x.size(); ++j) {
		v.max_bound_violation = std::max(v.max_bound_violation, p.lo[j] - x[j]);
		v.max_bound_violation = std::max(v.max_bound_violation, x[j] - p.hi[j]);
		v.objective += p.c[j] * x[j];
	}
	v.objective += p.offset;
	for (std::size_t i = 0; i < p.num_rows(); ++i) {
		double act = 0.0, scale = 1.0;
		for (const auto &t : p.rows[i].terms) {
			act += t.coef * x[t.var];
			scale = std::max(scale, std::abs(t.coef * x[t.var]));
		}
		double viol = 0.0;
		switch (p.row_sense[i]) {
		case RowSense::le:
			viol = act - p.rhs[i];
			break;
		case RowSense::ge:
			viol = p.rhs[i] - act;
			break;
		case RowSense::eq:
			viol = std::abs(act - p.rhs[i]);
			break;
		}
		v.max_row_violation = std::max(v.max_row_violation, viol / scale);
	}
	v.ok = v.max_row_violation <= tol && v.max_bound_violation <= tol;
	return v;
}

Verification verify_solution(const MilpProblem &p, const std::vector<double> &x, double tol) {
	Verification v = verify_solution(p.base, x, tol);
	if (x.size() != p.base.num_vars())
		return v;
	for (int j : p.int_vars)
		v.max_integrality_violation = std::max(v.max_integrality_violation, std::abs(x[j] - std::round(x[j])));
	v.ok = v.ok && v.max_integrality_violation <= tol;
	return v;
}

} // namespace mesbench::milp
