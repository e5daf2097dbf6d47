#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mesbench {

// Every error raised by the library derives from Error so callers can catch
// one type at the boundary (the CLI maps it to exit code 2).
class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
	explicit ConfigError(std::vector<std::string> violations);
	const std::vector<std::string> &violations() const noexcept { return violations_; }

private:
	std::vector<std::string> violations_;
};

#define MESBENCH_ERROR(Name)                                                                                           \
	class Name : public Error {                                                                                        \
	public:                                                                                                            \
		using Error::Error;                                                                                            \
	}

MESBENCH_ERROR(UnknownAsset);
MESBENCH_ERROR(StateError);
MESBENCH_ERROR(ParseError);
MESBENCH_ERROR(GapError);
MESBENCH_ERROR(UnitError);
MESBENCH_ERROR(DegenerateError);
MESBENCH_ERROR(NoConvergence);
MESBENCH_ERROR(RangeError);
MESBENCH_ERROR(NumericalError);
MESBENCH_ERROR(ShapeError);
MESBENCH_ERROR(ProtocolError);
MESBENCH_ERROR(DomainError);
MESBENCH_ERROR(EmptyError);
MESBENCH_ERROR(SolverFailure);

#undef MESBENCH_ERROR

} // namespace mesbench
