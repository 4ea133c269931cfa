#include "splitflow/net/experiment.hpp"

#include "splitflow/error.hpp"
#include "splitflow/schedule.hpp"

#include <csignal>
#include <cstdio>
#include <sys/prctl.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

namespace splitflow::net {

namespace {

constexpr std::chrono::milliseconds kSetupTimeout{10'000};

// Runs fn in a child process that never returns to the caller.
template <typename Fn>
pid_t spawn(Fn&& fn) {
    std::fflush(nullptr);
    const pid_t pid = ::fork();
    if (pid < 0) throw IoError("fork failed");
    if (pid > 0) return pid;
    ::prctl(PR_SET_PDEATHSIG, SIGKILL);
    int code = 0;
    try {
        fn();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "splitflow child: %s\n", e.what());
        code = 1;
    }
    ::_exit(code);
}

void reap(pid_t pid) {
    const auto deadline = Clock::now() + std::chrono::seconds(5);
    int status = 0;
    while (::waitpid(pid, &status, WNOHANG) == 0) {
        if (Clock::now() >= deadline) {
            ::kill(pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
}

}  // namespace

void NetExperimentConfig::validate() const {
    channel_a.validate();
    channel_b.validate();
    if (channel_a.via_relay || !channel_b.via_relay)
        throw DomainError("channel A must be direct and channel B must go through the relay");
    if (chunk_size == 0 || chunk_size > 0xFFFFFFFFu) throw DomainError("chunk size out of range");
    if (payload_size > (std::uint64_t{64} << 20)) throw DomainError("payload larger than 64 MiB");
    if (f_grid.empty()) throw DomainError("f grid is empty");
    for (double f : f_grid)
        if (!(f >= 0.0 && f <= 1.0)) throw DomainError("f grid values must lie in [0, 1]");
    if (timeout.count() <= 0) throw DomainError("timeout must be positive");
}

LoopbackRig::LoopbackRig(const NetExperimentConfig& cfg) {
    cfg.validate();
    const Endpoint loop{"127.0.0.1", 0};
    Socket direct_l = listen_tcp(loop);
    Socket relay_in_l = listen_tcp(loop);
    Socket relay_out_l = listen_tcp(loop);
    const std::uint16_t direct_port = local_port(direct_l);
    const std::uint16_t relay_in_port = local_port(relay_in_l);
    const std::uint16_t relay_out_port = local_port(relay_out_l);

    try {
        children_.push_back(spawn([&] {
            direct_l.close();
            relay_out_l.close();
            const Socket down = connect_tcp({"127.0.0.1", relay_out_port}, kSetupTimeout);
            const Socket up = accept_one(relay_in_l, kSetupTimeout);
            relay_in_l.close();
            run_relay(up, down, RelayOptions{cfg.channel_b, cfg.seed});
        }));
        relay_in_l.close();
        children_.push_back(spawn([&] {
            direct_l.close();
            relay_out_l.close();
            const Socket direct = connect_tcp({"127.0.0.1", direct_port}, kSetupTimeout);
            const Socket relay = connect_tcp({"127.0.0.1", relay_in_port}, kSetupTimeout);
            run_sender(direct, relay, SenderOptions{cfg.channel_a, cfg.chunk_size});
        }));
        Socket direct = accept_one(direct_l, kSetupTimeout);
        Socket relay_out = accept_one(relay_out_l, kSetupTimeout);
        receiver_.emplace(std::move(direct), std::move(relay_out));
    } catch (...) {
        for (pid_t pid : children_) ::kill(pid, SIGKILL);
        for (pid_t pid : children_) reap(pid);
        throw;
    }
}

LoopbackRig::~LoopbackRig() {
    if (receiver_) receiver_->shutdown();
    for (pid_t pid : children_) reap(pid);
}

TrialRecord run_trial(Receiver& rx, const NetExperimentConfig& cfg, double fraction, std::uint32_t trial_id) {
    return rx.run_trial(fraction, cfg.payload_size, trial_id, cfg.seed, cfg.timeout);
}

std::vector<FractionSummary> summarize(const std::vector<TrialRecord>& records, const std::vector<double>& grid) {
    std::vector<FractionSummary> out;
    out.reserve(grid.size());
    for (double f : grid) {
        std::vector<double> seconds;
        for (const TrialRecord& r : records)
            if (r.ok() && r.fraction == f) seconds.push_back(r.completion_seconds());
        FractionSummary s;
        s.fraction = f;
        s.ok_trials = seconds.size();
        if (seconds.size() >= 2) s.fit = fit_profile(seconds);
        out.push_back(s);
    }
    return out;
}

NetExperimentResult run_experiment(Receiver& rx, const NetExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<double> order = trial_schedule(cfg.f_grid, cfg.trials_per_f, cfg.seed, cfg.randomize_order);
    NetExperimentResult result;
    result.records.reserve(order.size());
    for (std::size_t t = 0; t < order.size(); ++t) {
        result.records.push_back(run_trial(rx, cfg, order[t], static_cast<std::uint32_t>(t)));
        if (!result.records.back().ok()) ++result.failures;
    }
    if (!order.empty() &&
        static_cast<double>(result.failures) > cfg.max_failure_rate * static_cast<double>(order.size())) {
        throw IoError(std::to_string(result.failures) + " of " + std::to_string(order.size()) +
                      " trials failed; first failure: " +
                      [&] {
                          for (const TrialRecord& r : result.records)
                              if (!r.ok()) return std::string(to_string(r.status)) + " (" + r.detail + ")";
                          return std::string();
                      }());
    }
    result.per_f = summarize(result.records, cfg.f_grid);
    return result;
}

NetExperimentResult run_loopback_experiment(const NetExperimentConfig& cfg) {
    LoopbackRig rig(cfg);
    return run_experiment(rig.receiver(), cfg);
}

}  // namespace splitflow::net
