#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mesbench/core/errors.hpp"
#include "mesbench/rl/ppo.hpp"
#include "mesbench/rl/td3.hpp"

// Agent checkpoints are plain text:
//   mesbench-agent 1
//   kind ppo|td3, seed, mode, tau, episode_len, reward_scale, bounds, hyper lines
//   config <bytes>\n<json>
//   net <name> <n sizes> <sizes...> then the flat parameters
//   end

namespace mesbench::rl {

plant::Controller Agent::controller() const {
	return [this](const SystemState &s) {
		const VectorXd u = act(spec_.bounds.normalize(s.obs));
		return action_from_normalized(std::vector<double>(u.data(), u.data() + u.size()), spec_.cfg);
	};
}

std::uint64_t episode_seed(std::uint64_t agent_seed, std::uint64_t episode) {
	std::uint64_t z = agent_seed * 0x9E3779B97F4A7C15ULL + episode + 0x632BE59BD9B4E019ULL;
	z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
	z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
	return z ^ (z >> 31);
}

namespace {

std::string num(double v) {
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

void write_vec(std::ostream &out, const VectorXd &v) {
	out << v.size();
	for (Eigen::Index i = 0; i < v.size(); ++i)
		out << ' ' << num(v[i]);
	out << '\n';
}

void write_net(std::ostream &out, const std::string &name, const MlpParams &p) {
	const auto sizes = p.sizes();
	out << "net " << name << ' ' << sizes.size();
	for (int s : sizes)
		out << ' ' << s;
	out << '\n';
	write_vec(out, p.flat());
}

void write_header(std::ostream &out, const Agent &a, std::uint64_t seed) {
	const auto &s = a.spec();
	out << "mesbench-agent 1\n";
	out << "kind " << a.kind() << '\n';
	out << "seed " << seed << '\n';
	out << "mode " << to_string(s.mode) << '\n';
	out << "tau " << s.tau << '\n';
	out << "episode_len " << s.episode_len << '\n';
	out << "reward_scale " << num(s.reward_scale) << '\n';
	out << "bounds_lo";
	for (double v : s.bounds.lo)
		out << ' ' << num(v);
	out << "\nbounds_hi";
	for (double v : s.bounds.hi)
		out << ' ' << num(v);
	out << '\n';
}

void write_config(std::ostream &out, const MesConfig &cfg) {
	const std::string js = dump_config(cfg);
	out << "config " << js.size() << '\n' << js << '\n';
}

class Reader {
public:
	explicit Reader(std::istream &in) : in_(in) {}
	std::string word() {
		std::string w;
		if (!(in_ >> w))
			throw ParseError("checkpoint: unexpected end of input");
		return w;
	}
	void expect(const std::string &w) {
		const auto got = word();
		if (got != w)
			throw ParseError("checkpoint: expected '" + w + "', got '" + got + "'");
	}
	double real() {
		const auto w = word();
		try {
			std::size_t used = 0;
			const double v = std::stod(w, &used);
			if (used == w.size())
				return v;
		} catch (const std::logic_error &) {
		}
		throw ParseError("checkpoint: bad number '" + w + "'");
	}
	long long integer() {
		const auto w = word();
		try {
			std::size_t used = 0;
			const long long v = std::stoll(w, &used);
			if (used == w.size())
				return v;
		} catch (const std::logic_error &) {
		}
		throw ParseError("checkpoint: bad integer '" + w + "'");
	}
	VectorXd vec() {
		const auto n = integer();
		if (n < 0)
			throw ParseError("checkpoint: negative length");
		VectorXd v(n);
		for (long long i = 0; i < n; ++i)
			v[i] = real();
		return v;
	}
	MlpParams net(const std::string &name) {
		expect("net");
		expect(name);
		const auto k = integer();
		if (k < 2 || k > 64)
			throw ParseError("checkpoint: bad layer count for " + name);
		std::vector<int> sizes(k);
		for (auto &s : sizes)
			s = static_cast<int>(integer());
		std::mt19937_64 dummy(0);
		MlpParams p = make_mlp(sizes, dummy);
		const VectorXd theta = vec();
		try {
			p.assign(theta);
		} catch (const ShapeError &e) {
			throw ParseError(std::string("checkpoint: ") + e.what());
		}
		return p;
	}
	std::string raw(std::size_t n) {
		in_.get(); // newline after the byte count
		std::string s(n, '\0');
		if (!in_.read(s.data(), static_cast<std::streamsize>(n)))
			throw ParseError("checkpoint: truncated config block");
		return s;
	}

private:
	std::istream &in_;
};

} // namespace

void PpoAgent::save(std::ostream &out) const {
	write_header(out, *this, seed_);
	out << "hyper gamma " << num(h_.gamma) << " learning_rate " << num(h_.learning_rate) << " nminibatches "
	    << h_.nminibatches << " n_steps " << h_.n_steps << " ent_coef " << num(h_.ent_coef) << " cliprange "
	    << num(h_.cliprange) << " noptepochs " << h_.noptepochs << " lambda " << num(h_.lambda) << " vf_coef "
	    << num(h_.vf_coef) << " max_grad_norm " << num(h_.max_grad_norm) << " hidden " << h_.hidden << '\n';
	write_config(out, spec_.cfg);
	write_net(out, "policy", policy.net);
	out << "log_std ";
	write_vec(out, policy.log_std);
	write_net(out, "value", value);
	out << "end\n";
}

void Td3Agent::save(std::ostream &out) const {
	write_header(out, *this, seed_);
	out << "hyper gamma " << num(h_.gamma) << " learning_rate " << num(h_.learning_rate) << " batch_size "
	    << h_.batch_size << " buffer_size " << h_.buffer_size << " train_freq " << h_.train_freq
	    << " gradient_steps " << h_.gradient_steps << " noise_type " << to_string(h_.noise_type) << " noise_std "
	    << num(h_.noise_std) << " policy_delay " << h_.policy_delay << " target_noise " << num(h_.target_noise)
	    << " target_clip " << num(h_.target_clip) << " rho " << num(h_.rho) << " learning_starts "
	    << h_.learning_starts << " hidden " << h_.hidden << '\n';
	write_config(out, spec_.cfg);
	write_net(out, "actor", nets.actor);
	write_net(out, "q1", nets.q1);
	write_net(out, "q2", nets.q2);
	write_net(out, "actor_targ", nets.actor_targ);
	write_net(out, "q1_targ", nets.q1_targ);
	write_net(out, "q2_targ", nets.q2_targ);
	out << "end\n";
}

std::unique_ptr<Agent> load_agent(std::istream &in) {
	Reader r(in);
	r.expect("mesbench-agent");
	if (r.integer() != 1)
		throw ParseError("checkpoint: unsupported version");
	r.expect("kind");
	const auto kind = r.word();
	if (kind != "ppo" && kind != "td3")
		throw ParseError("checkpoint: unknown agent kind '" + kind + "'");
	r.expect("seed");
	const auto seed = static_cast<std::uint64_t>(r.integer());
	EnvSpec spec;
	r.expect("mode");
	spec.mode = action_mode_from_string(r.word());
	r.expect("tau");
	spec.tau = static_cast<int>(r.integer());
	r.expect("episode_len");
	spec.episode_len = static_cast<std::size_t>(r.integer());
	r.expect("reward_scale");
	spec.reward_scale = r.real();
	r.expect("bounds_lo");
	for (auto &v : spec.bounds.lo)
		v = r.real();
	r.expect("bounds_hi");
	for (auto &v : spec.bounds.hi)
		v = r.real();

	r.expect("hyper");
	std::map<std::string, std::string> hyper;
	for (;;) {
		auto key = r.word();
		if (key == "config")
			break;
		hyper[key] = r.word();
	}
	auto get = [&](const char *k) -> const std::string & {
		auto it = hyper.find(k);
		if (it == hyper.end())
			throw ParseError(std::string("checkpoint: missing hyper-parameter ") + k);
		return it->second;
	};
	const auto bytes = r.integer();
	if (bytes < 0)
		throw ParseError("checkpoint: bad config size");
	spec.cfg = parse_config(r.raw(static_cast<std::size_t>(bytes)));

	try {
		if (kind == "ppo") {
			PpoHyper h;
			h.gamma = std::stod(get("gamma"));
			h.learning_rate = std::stod(get("learning_rate"));
			h.nminibatches = std::stoi(get("nminibatches"));
			h.n_steps = std::stoi(get("n_steps"));
			h.ent_coef = std::stod(get("ent_coef"));
			h.cliprange = std::stod(get("cliprange"));
			h.noptepochs = std::stoi(get("noptepochs"));
			h.lambda = std::stod(get("lambda"));
			h.vf_coef = std::stod(get("vf_coef"));
			h.max_grad_norm = std::stod(get("max_grad_norm"));
			h.hidden = std::stoi(get("hidden"));
			auto a = std::make_unique<PpoAgent>(spec, h, seed);
			a->policy.net = r.net("policy");
			r.expect("log_std");
			a->policy.log_std = r.vec();
			a->value = r.net("value");
			r.expect("end");
			return a;
		}
		Td3Hyper h;
		h.gamma = std::stod(get("gamma"));
		h.learning_rate = std::stod(get("learning_rate"));
		h.batch_size = std::stoi(get("batch_size"));
		h.buffer_size = std::stoi(get("buffer_size"));
		h.train_freq = std::stoi(get("train_freq"));
		h.gradient_steps = std::stoi(get("gradient_steps"));
		h.noise_type = noise_type_from_string(get("noise_type"));
		h.noise_std = std::stod(get("noise_std"));
		h.policy_delay = std::stoi(get("policy_delay"));
		h.target_noise = std::stod(get("target_noise"));
		h.target_clip = std::stod(get("target_clip"));
		h.rho = std::stod(get("rho"));
		h.learning_starts = std::stoi(get("learning_starts"));
		h.hidden = std::stoi(get("hidden"));
		auto a = std::make_unique<Td3Agent>(spec, h, seed);
		a->nets.actor = r.net("actor");
		a->nets.q1 = r.net("q1");
		a->nets.q2 = r.net("q2");
		a->nets.actor_targ = r.net("actor_targ");
		a->nets.q1_targ = r.net("q1_targ");
		a->nets.q2_targ = r.net("q2_targ");
		r.expect("end");
		return a;
	} catch (const std::logic_error &e) {
		throw ParseError(std::string("checkpoint: bad hyper-parameter value (") + e.what() + ")");
	}
}

std::unique_ptr<Agent> load_agent_file(const std::string &path) {
	std::ifstream in(path);
	if (!in)
		throw ParseError("cannot open checkpoint '" + path + "'");
	return load_agent(in);
}

void save_agent_file(const Agent &agent, const std::string &path) {
	std::ofstream out(path);
	if (!out)
		throw Error("cannot write checkpoint '" + path + "'");
	agent.save(out);
}

} // namespace mesbench::rl
