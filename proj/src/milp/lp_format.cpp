#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "mesbench/core/errors.hpp"
#include "mesbench/milp/problem.hpp"

// Text layout:
//   mesbench-lp 1
//   offset <v>
//   vars <n>
//   <name> <lo> <hi> <cost> <0|1 integer>
//   rows <m>
//   <name> <L|E|G> <rhs> <k> <var> <coef> ...
//   end

namespace mesbench::milp {

namespace {

std::string num(double v) {
	if (v == kInf)
		return "inf";
	if (v == -kInf)
		return "-inf";
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

class Tokens {
public:
	explicit Tokens(std::istream &in) : in_(in) {}
	std::string word() {
		std::string w;
		if (!(in_ >> w))
			throw ParseError("lp: unexpected end of input");
		return w;
	}
	void expect(const std::string &w) {
		auto got = word();
		if (got != w)
			throw ParseError("lp: expected '" + w + "', got '" + got + "'");
	}
	double real() {
		auto w = word();
		if (w == "inf" || w == "+inf")
			return kInf;
		if (w == "-inf")
			return -kInf;
		try {
			std::size_t used = 0;
			double v = std::stod(w, &used);
			if (used != w.size())
				throw ParseError("lp: bad number '" + w + "'");
			return v;
		} catch (const std::logic_error &) {
			throw ParseError("lp: bad number '" + w + "'");
		}
	}
	long integer() {
		auto w = word();
		try {
			std::size_t used = 0;
			long v = std::stol(w, &used);
			if (used != w.size() || v < 0)
				throw ParseError("lp: bad count '" + w + "'");
			return v;
		} catch (const std::logic_error &) {
			throw ParseError("lp: bad count '" + w + "'");
		}
	}

private:
	std::istream &in_;
};

} // namespace

void write_lp(std::ostream &out, const MilpProblem &p) {
	const auto &lp = p.base;
	std::vector<char> is_int(lp.num_vars(), 0);
	for (int j : p.int_vars)
		is_int.at(j) = 1;
	out << "mesbench-lp 1\n";
	out << "offset " << num(lp.offset) << "\n";
	out << "vars " << lp.num_vars() << "\n";
	for (std::size_t j = 0; j < lp.num_vars(); ++j)
		out << lp.var_name(j) << ' ' << num(lp.lo[j]) << ' ' << num(lp.hi[j]) << ' ' << num(lp.c[j]) << ' '
		    << int(is_int[j]) << "\n";
	out << "rows " << lp.num_rows() << "\n";
	for (std::size_t i = 0; i < lp.num_rows(); ++i) {
		const char s = lp.row_sense[i] == RowSense::le ? 'L' : lp.row_sense[i] == RowSense::eq ? 'E' : 'G';
		out << lp.row_name(i) << ' ' << s << ' ' << num(lp.rhs[i]) << ' ' << lp.rows[i].terms.size();
		for (const auto &t : lp.rows[i].terms)
			out << ' ' << t.var << ' ' << num(t.coef);
		out << "\n";
	}
	out << "end\n";
}

MilpProblem read_lp(std::istream &in) {
	Tokens tk(in);
	tk.expect("mesbench-lp");
	if (tk.integer() != 1)
		throw ParseError("lp: unsupported format version");
	MilpProblem p;
	auto &lp = p.base;
	tk.expect("offset");
	lp.offset = tk.real();
	tk.expect("vars");
	const long n = tk.integer();
	for (long j = 0; j < n; ++j) {
		auto name = tk.word();
		const double lo = tk.real(), hi = tk.real(), c = tk.real();
		const long flag = tk.integer();
		lp.add_var(lo, hi, c, name);
		if (flag == 1)
			p.int_vars.push_back(static_cast<int>(j));
		else if (flag != 0)
			throw ParseError("lp: integer flag must be 0 or 1");
	}
	tk.expect("rows");
	const long m = tk.integer();
	for (long i = 0; i < m; ++i) {
		auto name = tk.word();
		auto s = tk.word();
		RowSense sense;
		if (s == "L")
			sense = RowSense::le;
		else if (s == "E")
			sense = RowSense::eq;
		else if (s == "G")
			sense = RowSense::ge;
		else
			throw ParseError("lp: bad row sense '" + s + "'");
		const double b = tk.real();
		const long k = tk.integer();
		std::vector<Term> terms;
		terms.reserve(k);
		for (long t = 0; t < k; ++t) {
			const long var = tk.integer();
			if (var >= n)
				throw ParseError("lp: variable index out of range in row " + name);
			terms.push_back({static_cast<int>(var), tk.real()});
		}
		lp.add_row(std::move(terms), sense, b, name);
	}
	tk.expect("end");
	try {
		p.check();
	} catch (const std::invalid_argument &e) {
		throw ParseError(e.what());
	}
	return p;
}

} // namespace mesbench::milp
