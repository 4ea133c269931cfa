#include "config.hpp"

#include "splitflow/error.hpp"
#include "splitflow/schedule.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace splitflow::cli {

namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw DomainError(where + " must be a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.count(key)) throw DomainError("unknown key '" + key + "' in " + where);
}

template <typename T>
T number(const json& v, const std::string& name) {
    if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw DomainError(name + " must be a number");
    } else {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            throw DomainError(name + " must be a nonnegative integer");
    }
    return v.get<T>();
}

std::string text(const json& v, const std::string& name) {
    if (!v.is_string()) throw DomainError(name + " must be a string");
    return v.get<std::string>();
}

double parse_double(std::string_view s, const std::string& what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw DomainError("cannot parse '" + std::string(s) + "' as " + what);
    return v;
}

}  // namespace

GridSpec GridSpec::parse(const std::string& text) {
    GridSpec g;
    if (text.find(',') == std::string::npos) g.step = parse_double(text, "a grid step");
    else g.values = parse_number_list(text);
    return g;
}

std::vector<double> GridSpec::resolve() const {
    if (step) return uniform_grid(*step);
    if (values.empty()) throw DomainError("f grid is empty");
    for (double f : values)
        if (!(f >= 0.0 && f <= 1.0)) throw DomainError("f grid values must lie in [0, 1]");
    return values;
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::string_view rest(text);
    for (;;) {
        const auto comma = rest.find(',');
        out.push_back(parse_double(rest.substr(0, comma), "a number"));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

ChannelProfile parse_channel(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw DomainError("channel must be mu:sigma (got '" + text + "')");
    return ChannelProfile::make(parse_double(std::string_view(text).substr(0, colon), "mu"),
                                parse_double(std::string_view(text).substr(colon + 1), "sigma"));
}

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw DomainError(std::string("config is not valid JSON: ") + e.what());
    }
    only_keys(doc, "config", {"channels", "grid", "objective", "quadrature", "sim", "net", "opt"});
    RunConfig cfg;
    if (doc.contains("channels")) {
        const json& list = doc["channels"];
        if (!list.is_array()) throw DomainError("channels must be an array");
        for (const json& c : list) {
            only_keys(c, "channel", {"mu", "sigma"});
            if (!c.contains("mu") || !c.contains("sigma")) throw DomainError("each channel needs mu and sigma");
            cfg.channels.push_back(ChannelProfile::make(number<double>(c["mu"], "mu"), number<double>(c["sigma"], "sigma")));
        }
    }
    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        only_keys(g, "grid", {"step", "values"});
        GridSpec spec;
        if (g.contains("step") == g.contains("values")) throw DomainError("grid needs exactly one of step or values");
        if (g.contains("step")) spec.step = number<double>(g["step"], "grid.step");
        else {
            if (!g["values"].is_array()) throw DomainError("grid.values must be an array");
            for (const json& v : g["values"]) spec.values.push_back(number<double>(v, "grid value"));
        }
        cfg.grid = spec;
    }
    if (doc.contains("objective")) cfg.objective = text(doc["objective"], "objective");
    if (doc.contains("quadrature")) {
        const json& q = doc["quadrature"];
        only_keys(q, "quadrature", {"abs_tol", "max_panels"});
        if (q.contains("abs_tol")) cfg.quad.abs_tol = number<double>(q["abs_tol"], "quadrature.abs_tol");
        if (q.contains("max_panels")) cfg.quad.max_panels = number<std::size_t>(q["max_panels"], "quadrature.max_panels");
    }
    if (doc.contains("sim")) {
        const json& s = doc["sim"];
        only_keys(s, "sim", {"trials", "seed"});
        if (s.contains("trials")) cfg.trials = number<std::size_t>(s["trials"], "sim.trials");
        if (s.contains("seed")) cfg.seed = number<std::uint64_t>(s["seed"], "sim.seed");
    }
    if (doc.contains("net")) {
        const json& n = doc["net"];
        only_keys(n, "net", {"channel_a", "channel_b", "payload", "trials", "chunk", "timeout_ms", "randomize"});
        if (n.contains("channel_a")) cfg.net.channel_a = text(n["channel_a"], "net.channel_a");
        if (n.contains("channel_b")) cfg.net.channel_b = text(n["channel_b"], "net.channel_b");
        if (n.contains("payload")) cfg.net.payload = number<std::uint64_t>(n["payload"], "net.payload");
        if (n.contains("trials")) cfg.net.trials = number<std::size_t>(n["trials"], "net.trials");
        if (n.contains("chunk")) cfg.net.chunk = number<std::size_t>(n["chunk"], "net.chunk");
        if (n.contains("timeout_ms")) cfg.net.timeout_ms = number<std::int64_t>(n["timeout_ms"], "net.timeout_ms");
        if (n.contains("randomize")) {
            if (!n["randomize"].is_boolean()) throw DomainError("net.randomize must be a boolean");
            cfg.net.randomize = n["randomize"].get<bool>();
        }
    }
    if (doc.contains("opt")) {
        const json& o = doc["opt"];
        only_keys(o, "opt", {"n", "d", "noise", "trials", "jitter_a", "jitter_b"});
        if (o.contains("n")) cfg.opt.n = number<std::size_t>(o["n"], "opt.n");
        if (o.contains("d")) cfg.opt.d = number<std::size_t>(o["d"], "opt.d");
        if (o.contains("noise")) cfg.opt.noise = number<double>(o["noise"], "opt.noise");
        if (o.contains("trials")) cfg.opt.trials = number<std::size_t>(o["trials"], "opt.trials");
        if (o.contains("jitter_a")) cfg.opt.jitter_a = text(o["jitter_a"], "opt.jitter_a");
        if (o.contains("jitter_b")) cfg.opt.jitter_b = text(o["jitter_b"], "opt.jitter_b");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str());
}

}  // namespace splitflow::cli
