#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace mesbench::bench::detail {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work is claimed in index
// order; the first exception (lowest index) is rethrown after all threads join.
template <class Fn> void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
	std::vector<std::exception_ptr> errors(n);
	std::atomic<std::size_t> next{0};
	auto worker = [&] {
		for (std::size_t i = next++; i < n; i = next++) {
			try {
				fn(i);
			} catch (...) {
				errors[i] = std::current_exception();
			}
		}
	};
	const std::size_t k = std::max<std::size_t>(1, std::min(jobs, n));
	if (k == 1) {
		worker();
	} else {
		std::vector<std::thread> pool;
		for (std::size_t t = 0; t < k; ++t)
			pool.emplace_back(worker);
		for (auto &t : pool)
			t.join();
	}
	for (auto &e : errors)
		if (e)
			std::rethrow_exception(e);
}

} // namespace mesbench::bench::detail
