#include "frugal/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>

namespace frugal {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

long long parse_ll(const std::string& key, const std::string& v) {
    size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
    if (used != v.size()) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
    return out;
}

double parse_d(const std::string& key, const std::string& v) {
    size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    if (used != v.size()) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    return out;
}

using Setter = std::function<void(Config&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    auto set_i = [](int Config::* f) {
        return [f](Config& c, const std::string& k, const std::string& v) {
            c.*f = static_cast<int>(parse_ll(k, v));
        };
    };
    auto set_d = [](double Config::* f) {
        return [f](Config& c, const std::string& k, const std::string& v) {
            c.*f = parse_d(k, v);
        };
    };
    auto set_b = [](bool Config::* f) {
        return [f](Config& c, const std::string& k, const std::string& v) {
            try {
                c.*f = parse_bool(v);
            } catch (const ConfigError&) {
                throw ConfigError(k + ": expected on/off, got '" + v + "'");
            }
        };
    };
    auto set_s = [](std::string Config::* f) {
        return [f](Config& c, const std::string&, const std::string& v) { c.*f = v; };
    };

    static const std::map<std::string, Setter> table = {
        {"run.seed",
         [](Config& c, const std::string& k, const std::string& v) {
             const long long s = parse_ll(k, v);
             if (s < 0) throw ConfigError(k + ": seed must be non-negative");
             c.seed = static_cast<uint64_t>(s);
         }},
        {"run.data_dir", set_s(&Config::data_dir)},
        {"run.out_dir", set_s(&Config::out_dir)},
        {"run.log_every", set_i(&Config::log_every)},
        {"train.epochs", set_i(&Config::epochs)},
        {"train.warmup_epochs", set_i(&Config::warmup_epochs)},
        {"train.batch", set_i(&Config::batch)},
        {"train.lr", set_d(&Config::lr)},
        {"train.momentum", set_d(&Config::momentum)},
        {"train.weight_decay", set_d(&Config::weight_decay)},
        {"train.per_class", set_i(&Config::per_class)},
        {"eif.enabled", set_b(&Config::eif)},
        {"eif.r_set", set_d(&Config::r_set)},
        {"eif.alpha1", set_d(&Config::alpha1)},
        {"eif.alpha2", set_d(&Config::alpha2)},
        {"eif.window_batches", set_i(&Config::window_batches)},
        {"eif.entropy_t", set_d(&Config::entropy_t)},
        {"eif.t_init", set_d(&Config::t_init)},
        {"eif.adapt", set_b(&Config::eif_adapt)},
        {"eif.balanced", set_b(&Config::eif_balanced)},
        {"eif.filter_lr", set_d(&Config::filter_lr)},
        {"eif.filter_momentum", set_d(&Config::filter_momentum)},
        {"emp.enabled", set_b(&Config::emp)},
        {"emp.alpha", set_d(&Config::emp_alpha)},
        {"emp.gamma1", set_d(&Config::gamma1)},
        {"emp.gamma2", set_d(&Config::gamma2)},
        {"emp.normalize", set_b(&Config::emp_normalize)},
    };
    return table;
}

}  // namespace

bool parse_bool(const std::string& value) {
    if (value == "on" || value == "true" || value == "1") return true;
    if (value == "off" || value == "false" || value == "0") return false;
    throw ConfigError("expected on/off, got '" + value + "'");
}

void apply_kv(Config& cfg, const std::string& key, const std::string& value) {
    const auto& table = setters();
    auto it = table.find(key);
    if (it == table.end()) {
        throw ConfigError("unknown config key '" + key + "'");
    }
    it->second(cfg, key, value);
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        apply_kv(cfg, key, value);
    }
    return cfg;
}

void apply_overrides(Config& cfg, const std::vector<std::string>& pairs) {
    for (const std::string& kv : pairs) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override '" + kv + "' is not key=value");
        }
        apply_kv(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
}

std::string dump_config(const Config& cfg) {
    char buf[128];
    std::string out;
    auto put_s = [&](const char* k, const std::string& v) {
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    };
    auto put_i = [&](const char* k, long long v) {
        std::snprintf(buf, sizeof(buf), "%s = %lld\n", k, v);
        out += buf;
    };
    auto put_d = [&](const char* k, double v) {
        std::snprintf(buf, sizeof(buf), "%s = %.17g\n", k, v);
        out += buf;
    };
    auto put_b = [&](const char* k, bool v) { put_s(k, v ? "on" : "off"); };

    put_i("run.seed", static_cast<long long>(cfg.seed));
    put_s("run.data_dir", cfg.data_dir);
    put_s("run.out_dir", cfg.out_dir);
    put_i("run.log_every", cfg.log_every);
    put_i("train.epochs", cfg.epochs);
    put_i("train.warmup_epochs", cfg.warmup_epochs);
    put_i("train.batch", cfg.batch);
    put_d("train.lr", cfg.lr);
    put_d("train.momentum", cfg.momentum);
    put_d("train.weight_decay", cfg.weight_decay);
    put_i("train.per_class", cfg.per_class);
    put_b("eif.enabled", cfg.eif);
    put_d("eif.r_set", cfg.r_set);
    put_d("eif.alpha1", cfg.alpha1);
    put_d("eif.alpha2", cfg.alpha2);
    put_i("eif.window_batches", cfg.window_batches);
    put_d("eif.entropy_t", cfg.entropy_t);
    put_d("eif.t_init", cfg.t_init);
    put_b("eif.adapt", cfg.eif_adapt);
    put_b("eif.balanced", cfg.eif_balanced);
    put_d("eif.filter_lr", cfg.filter_lr);
    put_d("eif.filter_momentum", cfg.filter_momentum);
    put_b("emp.enabled", cfg.emp);
    put_d("emp.alpha", cfg.emp_alpha);
    put_d("emp.gamma1", cfg.gamma1);
    put_d("emp.gamma2", cfg.gamma2);
    put_b("emp.normalize", cfg.emp_normalize);
    return out;
}

}  // namespace frugal
