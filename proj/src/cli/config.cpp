#include "mixtraffic/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace mixtraffic::cli {

using nlohmann::json;

namespace {

const char* kApproachKeys[sim::kApproachCount] = {"N", "E", "S", "W"};

// Reads one JSON object, rejecting keys that are never consumed.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError(path_, "expected an object");
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    template <typename Fn>
    void with(const std::string& key, Fn fn) {
        seen_.insert(key);
        if (node_.contains(key)) fn(node_.at(key), field(key));
    }

    void number(const std::string& key, double& out) {
        with(key, [&](const json& v, const std::string& f) {
            if (!v.is_number()) throw ConfigError(f, "expected a number");
            out = v.get<double>();
        });
    }

    void integer(const std::string& key, int& out) {
        with(key, [&](const json& v, const std::string& f) {
            if (!v.is_number_integer()) throw ConfigError(f, "expected an integer");
            out = v.get<int>();
        });
    }

    void boolean(const std::string& key, bool& out) {
        with(key, [&](const json& v, const std::string& f) {
            if (!v.is_boolean()) throw ConfigError(f, "expected true or false");
            out = v.get<bool>();
        });
    }

    std::string field(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() const {
        for (const auto& [key, _] : node_.items())
            if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

SignalSchedule parse_schedule(const json& node, const std::string& path) {
    Section s(node, path);
    double offset = 0.0;
    s.number("phase_offset_s", offset);
    std::vector<SignalPhase> phases;
    s.with("phases", [&](const json& list, const std::string& f) {
        if (!list.is_array()) throw ConfigError(f, "expected an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string pf = f + "[" + std::to_string(i) + "]";
            Section p(list[i], pf);
            SignalPhase phase;
            p.with("color", [&](const json& c, const std::string& cf) {
                if (c == "green")
                    phase.color = SignalColor::Green;
                else if (c == "red")
                    phase.color = SignalColor::Red;
                else
                    throw ConfigError(cf, "expected \"green\" or \"red\"");
            });
            p.number("duration_s", phase.duration);
            p.finish();
            phases.push_back(phase);
        }
    });
    s.finish();
    try {
        return SignalSchedule(std::move(phases), offset);
    } catch (const ConfigError& e) {
        throw e.nested(path);
    }
}

json schedule_json(const SignalSchedule& s) {
    json phases = json::array();
    for (const auto& p : s.phases())
        phases.push_back({{"color", to_string(p.color)}, {"duration_s", p.duration}});
    return {{"phase_offset_s", s.phase_offset()}, {"phases", phases}};
}

void parse_sweep(const json& node, ScenarioConfig& cfg) {
    Section s(node, "sweep");
    SweepAxis axis;
    s.with("key", [&](const json& v, const std::string& f) {
        if (!v.is_string()) throw ConfigError(f, "expected a string");
        axis.key = v.get<std::string>();
        const auto& keys = sweep_keys();
        if (std::find(keys.begin(), keys.end(), axis.key) == keys.end())
            throw ConfigError(f, "unsupported sweep key '" + axis.key + "'");
    });
    s.with("values", [&](const json& list, const std::string& f) {
        if (!list.is_array() || list.empty()) throw ConfigError(f, "expected a nonempty array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string vf = f + "[" + std::to_string(i) + "]";
            const json& v = list[i];
            if (v.is_number()) {
                axis.values.push_back({v.get<double>()});
            } else if (v.is_array() && !v.empty() &&
                       std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
                axis.values.push_back(v.get<std::vector<double>>());
            } else {
                throw ConfigError(vf, "expected a number or an array of numbers");
            }
        }
    });
    s.finish();
    if (axis.key.empty()) throw ConfigError("sweep.key", "missing");
    if (axis.values.empty()) throw ConfigError("sweep.values", "missing");
    const std::size_t want = axis.key == "gain_triple" ? 3 : 1;
    for (std::size_t i = 0; i < axis.values.size(); ++i)
        if (axis.values[i].size() != want)
            throw ConfigError("sweep.values[" + std::to_string(i) + "]",
                              "expected " + std::to_string(want) + " number(s)");
    cfg.sweep = std::move(axis);
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

}  // namespace

const std::vector<std::string>& sweep_keys() {
    static const std::vector<std::string> keys{
        "phi_per_s",      "kappa_T_per_s",    "kappa_R_per_s",    "kappa_imag_per_s",
        "tau_s_s",        "cav_fraction",     "arrival_rate_vph", "right_turn_fraction",
        "gain_triple"};
    return keys;
}

void ScenarioConfig::validate() const {
    world.validate();
    if (!(run.duration >= 0.0) || !std::isfinite(run.duration))
        throw ConfigError("run.duration_s", "must be finite and >= 0");
    if (run.seeds.empty()) throw ConfigError("run.seeds", "must be nonempty");
    if (run.trace_stride < 0) throw ConfigError("run.trace_stride", "must be >= 0");
    for (const auto& p : expand_sweep(*this)) p.world.validate();
}

ScenarioConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("line " + std::to_string(line_of(text, e.byte)), e.what());
    }

    ScenarioConfig cfg;
    auto& w = cfg.world;
    Section top(root, "");

    top.with("limits", [&](const json& n, const std::string& f) {
        Section s(n, f);
        s.number("u_max_mps2", w.limits.u_max);
        s.number("v_max_mps", w.limits.v_max);
        s.number("v_min_mps", w.limits.v_min);
        s.number("gamma_m", w.limits.gamma);
        s.number("v_des_mps", w.limits.v_des);
        s.finish();
    });
    top.with("gains", [&](const json& n, const std::string& f) {
        Section s(n, f);
        s.number("phi_per_s", w.gains.phi);
        s.number("kappa_s_per_s", w.gains.kappa_s);
        s.number("kappa_T_per_s", w.gains.kappa_T);
        s.number("kappa_R_per_s", w.gains.kappa_R);
        s.number("kappa_imag_per_s", w.gains.kappa_imag);
        s.number("tau_s_s", w.gains.tau_s);
        s.finish();
    });
    top.with("idm", [&](const json& n, const std::string& f) {
        Section s(n, f);
        s.number("v_des_mps", w.idm.v_des);
        s.number("xi", w.idm.xi);
        s.number("T_headway_s", w.idm.T_headway);
        s.number("beta_mps2", w.idm.beta);
        s.finish();
    });
    w.idm.gamma = w.limits.gamma;
    top.with("hdv_leader_accel", [&](const json& n, const std::string& f) {
        const auto p = n.is_string() ? sim::parse_leader_accel_policy(n.get<std::string>())
                                     : std::nullopt;
        if (!p) throw ConfigError(f, "expected \"constant_accel\", \"braking_only\" or \"robust\"");
        w.hdv_leader_accel = *p;
    });
    top.with("signals", [&](const json& n, const std::string& f) {
        Section s(n, f);
        for (int a = 0; a < sim::kApproachCount; ++a)
            s.with(kApproachKeys[a], [&](const json& sn, const std::string& sf) {
                w.signals[a] = parse_schedule(sn, sf);
            });
        s.finish();
    });
    top.with("topology", [&](const json& n, const std::string& f) {
        Section s(n, f);
        s.number("region_length_m", w.topology.region_length);
        s.number("exit_length_m", w.topology.exit_length);
        s.number("turn_arc_length_m", w.topology.turn_arc_length);
        s.number("conflict_offset_m", w.topology.conflict_offset);
        s.number("sensing_range_m", w.topology.sensing_range);
        s.boolean("right_on_red", w.topology.right_on_red);
        s.finish();
    });
    top.with("traffic", [&](const json& n, const std::string& f) {
        Section s(n, f);
        s.number("arrival_rate_vph", w.traffic.arrival_rate_vph);
        s.number("cav_fraction", w.traffic.cav_fraction);
        s.number("right_turn_fraction", w.traffic.right_turn_fraction);
        s.finish();
    });
    top.with("run", [&](const json& n, const std::string& f) {
        Section s(n, f);
        s.number("dt_s", w.dt);
        s.number("duration_s", cfg.run.duration);
        s.integer("trace_stride", cfg.run.trace_stride);
        s.with("seeds", [&](const json& list, const std::string& sf) {
            if (!list.is_array()) throw ConfigError(sf, "expected an array of integers");
            cfg.run.seeds.clear();
            for (const auto& x : list) {
                if (!x.is_number_unsigned()) throw ConfigError(sf, "seeds must be integers >= 0");
                cfg.run.seeds.push_back(x.get<std::uint64_t>());
            }
        });
        s.finish();
    });
    top.with("sweep", [&](const json& n, const std::string&) { parse_sweep(n, cfg); });
    top.finish();

    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

json to_json(const ScenarioConfig& cfg) {
    const auto& w = cfg.world;
    json signals = json::object();
    for (int a = 0; a < sim::kApproachCount; ++a)
        signals[kApproachKeys[a]] = schedule_json(w.signals[a]);

    json root = {
        {"limits",
         {{"u_max_mps2", w.limits.u_max},
          {"v_max_mps", w.limits.v_max},
          {"v_min_mps", w.limits.v_min},
          {"gamma_m", w.limits.gamma},
          {"v_des_mps", w.limits.v_des}}},
        {"gains",
         {{"phi_per_s", w.gains.phi},
          {"kappa_s_per_s", w.gains.kappa_s},
          {"kappa_T_per_s", w.gains.kappa_T},
          {"kappa_R_per_s", w.gains.kappa_R},
          {"kappa_imag_per_s", w.gains.kappa_imag},
          {"tau_s_s", w.gains.tau_s}}},
        {"idm",
         {{"v_des_mps", w.idm.v_des},
          {"xi", w.idm.xi},
          {"T_headway_s", w.idm.T_headway},
          {"beta_mps2", w.idm.beta}}},
        {"hdv_leader_accel", sim::to_string(w.hdv_leader_accel)},
        {"signals", signals},
        {"topology",
         {{"region_length_m", w.topology.region_length},
          {"exit_length_m", w.topology.exit_length},
          {"turn_arc_length_m", w.topology.turn_arc_length},
          {"conflict_offset_m", w.topology.conflict_offset},
          {"sensing_range_m", w.topology.sensing_range},
          {"right_on_red", w.topology.right_on_red}}},
        {"traffic",
         {{"arrival_rate_vph", w.traffic.arrival_rate_vph},
          {"cav_fraction", w.traffic.cav_fraction},
          {"right_turn_fraction", w.traffic.right_turn_fraction}}},
        {"run",
         {{"dt_s", w.dt},
          {"duration_s", cfg.run.duration},
          {"seeds", cfg.run.seeds},
          {"trace_stride", cfg.run.trace_stride}}},
    };
    if (cfg.sweep) {
        json values = json::array();
        for (const auto& v : cfg.sweep->values) {
            if (cfg.sweep->key == "gain_triple")
                values.push_back(v);
            else
                values.push_back(v.front());
        }
        root["sweep"] = {{"key", cfg.sweep->key}, {"values", values}};
    }
    return root;
}

std::string serialize_config(const ScenarioConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

sim::WorldConfig apply_sweep_value(const sim::WorldConfig& base, const std::string& key,
                                   const std::vector<double>& value) {
    sim::WorldConfig w = base;
    if (key == "gain_triple") {
        if (value.size() != 3) throw ConfigError("sweep.values", "gain_triple needs 3 numbers");
        w.gains.kappa_R = value[0];
        w.gains.kappa_T = value[1];
        w.gains.kappa_imag = value[2];
        return w;
    }
    if (value.size() != 1) throw ConfigError("sweep.values", key + " needs 1 number");
    const double x = value.front();
    if (key == "phi_per_s")
        w.gains.phi = x;
    else if (key == "kappa_T_per_s")
        w.gains.kappa_T = x;
    else if (key == "kappa_R_per_s")
        w.gains.kappa_R = x;
    else if (key == "kappa_imag_per_s")
        w.gains.kappa_imag = x;
    else if (key == "tau_s_s")
        w.gains.tau_s = x;
    else if (key == "cav_fraction")
        w.traffic.cav_fraction = x;
    else if (key == "arrival_rate_vph")
        w.traffic.arrival_rate_vph = x;
    else if (key == "right_turn_fraction")
        w.traffic.right_turn_fraction = x;
    else
        throw ConfigError("sweep.key", "unsupported sweep key '" + key + "'");
    return w;
}

std::vector<SweepPoint> expand_sweep(const ScenarioConfig& cfg) {
    if (!cfg.sweep) return {{"", "", cfg.world}};
    std::vector<SweepPoint> out;
    for (const auto& v : cfg.sweep->values) {
        std::ostringstream label;
        for (std::size_t i = 0; i < v.size(); ++i) label << (i ? "/" : "") << v[i];
        out.push_back({cfg.sweep->key, label.str(),
                       apply_sweep_value(cfg.world, cfg.sweep->key, v)});
    }
    return out;
}

}  // namespace mixtraffic::cli
