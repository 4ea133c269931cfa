#include "splitflow/cli/app.hpp"

#include "config.hpp"

#include "splitflow/error.hpp"
#include "splitflow/estimator.hpp"
#include "splitflow/frontier.hpp"
#include "splitflow/montecarlo.hpp"
#include "splitflow/net/experiment.hpp"
#include "splitflow/opt/experiment.hpp"
#include "splitflow/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <locale>
#include <optional>
#include <sstream>

namespace splitflow::cli {

namespace {

// Locale-independent number formatting.
std::string fmt(double v, int precision = -1) {
    char buf[64];
    const auto r = precision < 0 ? std::to_chars(buf, buf + sizeof(buf), v)
                                 : std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, precision);
    return std::string(buf, r.ptr);
}

struct Options {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;

    std::vector<std::string> channels;
    std::string grid;
    std::string objective;
    std::optional<double> abs_tol;
    std::optional<std::size_t> trials;
    unsigned threads = 0;
    std::string input = "-";

    std::optional<std::string> channel_a;
    std::optional<std::string> channel_b;
    std::optional<std::uint64_t> payload;
    std::optional<std::size_t> chunk;
    std::optional<std::int64_t> timeout_ms;
    bool no_randomize = false;
    std::string direct = "127.0.0.1:9701";
    std::string relay_in = "127.0.0.1:9702";
    std::string relay_out = "127.0.0.1:9703";

    std::optional<std::size_t> n;
    std::optional<std::size_t> d;
    std::optional<double> noise;
    std::optional<std::string> jitter_a;
    std::optional<std::string> jitter_b;
};

// File config with command-line overrides applied.
RunConfig effective_config(const Options& o) {
    RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    if (!o.channels.empty()) {
        cfg.channels.clear();
        for (const auto& c : o.channels) cfg.channels.push_back(parse_channel(c));
    }
    if (!o.grid.empty()) cfg.grid = GridSpec::parse(o.grid);
    if (!o.objective.empty()) cfg.objective = o.objective;
    if (o.abs_tol) cfg.quad.abs_tol = *o.abs_tol;
    if (o.seed) cfg.seed = *o.seed;
    if (o.trials) {
        cfg.trials = *o.trials;
        cfg.net.trials = *o.trials;
        cfg.opt.trials = *o.trials;
    }
    if (o.channel_a) cfg.net.channel_a = *o.channel_a;
    if (o.channel_b) cfg.net.channel_b = *o.channel_b;
    if (o.payload) cfg.net.payload = *o.payload;
    if (o.chunk) cfg.net.chunk = *o.chunk;
    if (o.timeout_ms) cfg.net.timeout_ms = *o.timeout_ms;
    if (o.no_randomize) cfg.net.randomize = false;
    if (o.n) cfg.opt.n = *o.n;
    if (o.d) cfg.opt.d = *o.d;
    if (o.noise) cfg.opt.noise = *o.noise;
    if (o.jitter_a) cfg.opt.jitter_a = *o.jitter_a;
    if (o.jitter_b) cfg.opt.jitter_b = *o.jitter_b;
    if (!(cfg.quad.abs_tol > 0.0)) throw DomainError("quadrature tolerance must be positive");
    return cfg;
}

std::vector<double> grid_or(const RunConfig& cfg, double default_step) {
    return cfg.grid ? cfg.grid->resolve() : uniform_grid(default_step);
}

void require_pair(const RunConfig& cfg, const char* cmd) {
    if (cfg.channels.size() != 2)
        throw DomainError(std::string(cmd) + " needs exactly two channels (got " + std::to_string(cfg.channels.size()) +
                          ")");
}

std::vector<MomentPoint> pair_sweep(const RunConfig& cfg) {
    const SweepOptions opts{cfg.quad};
    if (cfg.grid && !cfg.grid->step) return sweep_fractions(cfg.channels[0], cfg.channels[1], cfg.grid->resolve(), opts);
    return sweep_curve(cfg.channels[0], cfg.channels[1], cfg.grid ? *cfg.grid->step : 0.01, opts);
}

void selected_footer(std::ostream& out, const RunConfig& cfg, std::span<const MomentPoint> pts) {
    if (!cfg.objective) return;
    const MomentPoint best = select_fraction(pts, Objective::parse(*cfg.objective));
    out << "# selected f=";
    if (best.fractions.size() == 2) out << fmt(best.f(), 12);
    else
        for (std::size_t k = 0; k < best.fractions.size(); ++k) out << (k ? ";" : "") << fmt(best.fractions[k], 12);
    out << "\n";
}

void cmd_analyze(const RunConfig& cfg, std::ostream& out) {
    require_pair(cfg, "analyze");
    if (cfg.objective) Objective::parse(*cfg.objective);
    const auto pts = pair_sweep(cfg);
    out << "f,mu,var,pareto\n";
    for (const auto& p : pts)
        out << fmt(p.f(), 12) << "," << fmt(p.mean, 12) << "," << fmt(p.variance, 12) << ","
            << (p.pareto ? "true" : "false") << "\n";
    selected_footer(out, cfg, pts);
}

void cmd_frontier(const RunConfig& cfg, std::ostream& out) {
    if (cfg.channels.size() < 2) throw DomainError("frontier needs at least two channels");
    if (cfg.objective) Objective::parse(*cfg.objective);
    std::vector<MomentPoint> pts;
    if (cfg.channels.size() == 2) {
        pts = pair_sweep(cfg);
        out << "f,mu,var\n";
    } else {
        if (cfg.grid && !cfg.grid->step) throw DomainError("simplex sweeps need a grid step, not a list");
        pts = sweep_simplex(cfg.channels, cfg.grid ? *cfg.grid->step : 0.05, SweepOptions{cfg.quad});
        for (std::size_t k = 0; k < cfg.channels.size(); ++k) out << "f" << k + 1 << ",";
        out << "mu,var\n";
    }
    for (const auto& p : pareto_frontier(pts)) {
        if (p.fractions.size() == 2) out << fmt(p.f(), 12) << ",";
        else
            for (double f : p.fractions) out << fmt(f, 12) << ",";
        out << fmt(p.mean, 12) << "," << fmt(p.variance, 12) << "\n";
    }
    selected_footer(out, cfg, pts);
}

void cmd_simulate(const RunConfig& cfg, unsigned threads, std::ostream& out) {
    require_pair(cfg, "simulate");
    const auto grid = grid_or(cfg, 0.1);
    if (cfg.trials < 1) throw DomainError("simulation needs at least one trial");
    out << "f,empirical_mean,empirical_var,stderr,trials\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto model = PartitionedModel::pair(cfg.channels[0], cfg.channels[1], grid[k]);
        const SimResult r = estimate_moments(model, SimConfig{cfg.trials, derive_seed(cfg.seed, k), true, threads});
        out << fmt(grid[k]) << "," << fmt(r.empirical_mean) << "," << fmt(r.empirical_variance) << ","
            << fmt(r.std_error_mean) << "," << r.trials << "\n";
    }
}

void cmd_fit(const std::string& input, std::istream& in, std::ostream& out) {
    std::ifstream file;
    std::istream* src = &in;
    if (input != "-") {
        file.open(input);
        if (!file) throw IoError("cannot read '" + input + "'");
        src = &file;
    }
    std::vector<double> xs;
    std::string line;
    for (std::size_t no = 1; std::getline(*src, line); ++no) {
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(line.data() + b, line.data() + e + 1, v);
        if (ec != std::errc() || ptr != line.data() + e + 1)
            throw DataError("line " + std::to_string(no) + ": cannot parse '" + line + "' as a number");
        xs.push_back(v);
    }
    const FitReport r = fit_profile(xs);
    nlohmann::json j;
    j["mu"] = r.mean;
    j["sigma"] = r.std_dev;
    j["n"] = r.sample_count;
    j["skewness"] = r.skewness;
    j["excess_kurtosis"] = r.excess_kurtosis;
    j["normal_ok"] = r.normality_flag;
    out << j.dump() << "\n";
}

net::NetExperimentConfig net_config(const RunConfig& cfg) {
    net::NetExperimentConfig n;
    n.channel_a = net::ChannelConfig::parse(cfg.net.channel_a, false);
    n.channel_b = net::ChannelConfig::parse(cfg.net.channel_b, true);
    n.payload_size = cfg.net.payload;
    n.f_grid = grid_or(cfg, 0.1);
    n.trials_per_f = cfg.net.trials;
    n.seed = cfg.seed;
    n.randomize_order = cfg.net.randomize;
    n.timeout = std::chrono::milliseconds(cfg.net.timeout_ms);
    n.chunk_size = cfg.net.chunk;
    n.validate();
    return n;
}

void write_net(const net::NetExperimentResult& res, std::ostream& out, std::ostream& err) {
    out << "trial_id,f,bytes_a,bytes_b,completion_ns,status\n";
    for (const auto& r : res.records) {
        out << r.trial_id << "," << fmt(r.fraction) << "," << r.bytes_a << "," << r.bytes_b << ",";
        if (r.ok()) out << r.completion_ns;
        out << "," << net::to_string(r.status) << "\n";
    }
    for (const auto& s : res.per_f)
        if (s.fit)
            err << "# f=" << fmt(s.fraction) << " trials=" << s.ok_trials << " mean_s=" << fmt(s.fit->mean, 6)
                << " sd_s=" << fmt(s.fit->std_dev, 6) << "\n";
    if (res.failures) err << "# " << res.failures << " failed trials\n";
}

void cmd_optdemo(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto problem = opt::make_synthetic(cfg.opt.n, cfg.opt.d, cfg.opt.noise, derive_seed(cfg.seed, 1));
    opt::OptExperimentConfig oc;
    oc.f_grid = grid_or(cfg, 0.1);
    oc.trials_per_f = cfg.opt.trials;
    oc.jitter_i = opt::JitterProfile::parse(cfg.opt.jitter_a);
    oc.jitter_j = opt::JitterProfile::parse(cfg.opt.jitter_b);
    oc.seed = cfg.seed;
    const auto records = opt::run_opt_experiment(problem.data, oc);
    out << "trial_id,f,completion_ns,quality_gap\n";
    std::size_t failed = 0;
    for (const auto& r : records) {
        if (!r.ok) {
            ++failed;
            err << "# trial " << r.trial_id << " at f=" << fmt(r.fraction) << " failed: " << r.error << "\n";
            continue;
        }
        out << r.trial_id << "," << fmt(r.fraction) << "," << r.completion_ns << "," << fmt(r.quality_gap) << "\n";
    }
    if (failed) err << "# " << failed << " failed trials omitted\n";
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const ConvergenceError*>(&e)) return kExitNumeric;
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    if (dynamic_cast<const Error*>(&e)) return kExitUsage;
    return 1;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Split work across channels with Normal completion times"};
    app.name("splitflow");
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config_path, "JSON run configuration");
    app.add_option("--seed", o.seed, "seed for every stochastic step");
    app.add_option("--out", o.out_path, "output file (default standard output)");

    const auto add_model_flags = [&](CLI::App* sub) {
        sub->add_option("--channel", o.channels, "channel profile mu:sigma (repeat per channel)");
        sub->add_option("--f-grid,--step", o.grid, "grid step, or a comma-separated list of f values");
        sub->add_option("--abs-tol", o.abs_tol, "quadrature absolute tolerance");
    };
    CLI::App* analyze = app.add_subcommand("analyze", "mean and variance over the f grid");
    add_model_flags(analyze);
    analyze->add_option("--objective", o.objective, "min-mean, min-variance, mean-plus-k-sigma:K or scalarized:L");
    CLI::App* frontier = app.add_subcommand("frontier", "Pareto-efficient splits (2 to 4 channels)");
    add_model_flags(frontier);
    frontier->add_option("--objective", o.objective, "objective used for the selected split");
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo moments over the f grid");
    add_model_flags(simulate);
    simulate->add_option("--trials", o.trials, "trials per grid value");
    simulate->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    CLI::App* fit = app.add_subcommand("fit", "fit a Normal profile to one number per line");
    fit->add_option("--input", o.input, "input file, - for standard input");

    CLI::App* netdemo = app.add_subcommand("netdemo", "two-path loopback transfer experiment");
    netdemo->require_subcommand(1);
    const auto add_net_flags = [&](CLI::App* sub) {
        sub->add_option("--channel-a", o.channel_a, "direct path base_ms:jitter_ms:bytes_per_s");
        sub->add_option("--channel-b", o.channel_b, "relayed path base_ms:jitter_ms:bytes_per_s");
        sub->add_option("--chunk", o.chunk, "chunk size in bytes");
    };
    const auto add_trial_flags = [&](CLI::App* sub) {
        sub->add_option("--payload", o.payload, "payload bytes per trial");
        sub->add_option("--f-grid", o.grid, "grid step or comma-separated f values");
        sub->add_option("--trials", o.trials, "trials per grid value");
        sub->add_option("--timeout-ms", o.timeout_ms, "per-trial timeout");
        sub->add_flag("--no-randomize", o.no_randomize, "run the grid in order");
    };
    CLI::App* net_run = netdemo->add_subcommand("run", "relay and sender as child processes on loopback");
    add_net_flags(net_run);
    add_trial_flags(net_run);
    CLI::App* net_recv = netdemo->add_subcommand("recv", "receiver; drives the trials");
    add_trial_flags(net_recv);
    net_recv->add_option("--direct", o.direct, "listen address for the direct path");
    net_recv->add_option("--relay-out", o.relay_out, "listen address for the relay output");
    CLI::App* net_send = netdemo->add_subcommand("send", "sender");
    add_net_flags(net_send);
    net_send->add_option("--direct", o.direct, "receiver address for the direct path");
    net_send->add_option("--relay-in", o.relay_in, "relay input address");
    CLI::App* net_relay = netdemo->add_subcommand("relay", "relay for channel B");
    add_net_flags(net_relay);
    net_relay->add_option("--listen", o.relay_in, "relay input address");
    net_relay->add_option("--forward", o.relay_out, "receiver address for the relay output");

    CLI::App* optdemo = app.add_subcommand("optdemo", "parallel least-squares split experiment");
    optdemo->add_option("--n", o.n, "rows");
    optdemo->add_option("--d", o.d, "features");
    optdemo->add_option("--noise", o.noise, "target noise sd");
    optdemo->add_option("--f-grid", o.grid, "grid step or comma-separated f values");
    optdemo->add_option("--trials", o.trials, "trials per grid value");
    optdemo->add_option("--jitter-a", o.jitter_a, "shard i per-iteration delay mean_ms:sigma_ms");
    optdemo->add_option("--jitter-b", o.jitter_b, "shard j per-iteration delay mean_ms:sigma_ms");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    std::ostringstream body;
    body.imbue(std::locale::classic());
    try {
        const RunConfig cfg = effective_config(o);
        if (analyze->parsed()) cmd_analyze(cfg, body);
        else if (frontier->parsed()) cmd_frontier(cfg, body);
        else if (simulate->parsed()) cmd_simulate(cfg, o.threads, body);
        else if (fit->parsed()) cmd_fit(o.input, in, body);
        else if (optdemo->parsed()) cmd_optdemo(cfg, body, err);
        else if (net_run->parsed()) write_net(net::run_loopback_experiment(net_config(cfg)), body, err);
        else if (net_recv->parsed()) {
            const auto nc = net_config(cfg);
            const net::Socket direct_l = net::listen_tcp(net::Endpoint::parse(o.direct));
            const net::Socket relay_l = net::listen_tcp(net::Endpoint::parse(o.relay_out));
            const std::chrono::seconds wait(120);
            net::Socket direct = net::accept_one(direct_l, wait);
            net::Socket relay = net::accept_one(relay_l, wait);
            net::Receiver rx(std::move(direct), std::move(relay));
            auto res = net::run_experiment(rx, nc);
            rx.shutdown();
            write_net(res, body, err);
        } else if (net_send->parsed()) {
            const auto a = net::ChannelConfig::parse(cfg.net.channel_a, false);
            const std::chrono::seconds wait(60);
            const net::Socket direct = net::connect_tcp(net::Endpoint::parse(o.direct), wait);
            const net::Socket relay = net::connect_tcp(net::Endpoint::parse(o.relay_in), wait);
            net::run_sender(direct, relay, net::SenderOptions{a, cfg.net.chunk});
        } else if (net_relay->parsed()) {
            const auto b = net::ChannelConfig::parse(cfg.net.channel_b, true);
            const net::Socket listener = net::listen_tcp(net::Endpoint::parse(o.relay_in));
            const net::Socket down = net::connect_tcp(net::Endpoint::parse(o.relay_out), std::chrono::seconds(60));
            const net::Socket up = net::accept_one(listener, std::chrono::seconds(120));
            net::run_relay(up, down, net::RelayOptions{b, cfg.seed});
        }
    } catch (const std::exception& e) {
        err << "splitflow: " << e.what() << "\n";
        return exit_code_for(e);
    }

    if (o.out_path.empty()) {
        out << body.str();
        out.flush();
    } else {
        std::ofstream f(o.out_path, std::ios::binary);
        f << body.str();
        if (!f) {
            err << "splitflow: cannot write '" << o.out_path << "'\n";
            return kExitIo;
        }
    }
    return kExitOk;
}

}  // namespace splitflow::cli
