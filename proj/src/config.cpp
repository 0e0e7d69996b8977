#include "greenpot/config.hpp"

#include <fstream>
#include <sstream>

#include "greenpot/errors.hpp"

namespace greenpot {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

Config Config::parse(std::istream& is) {
    Config cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        cfg.set(section.empty() ? key : section + "." + key, value);
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    return parse(in);
}

void Config::set(const std::string& key, std::string value) {
    entries_[key] = std::move(value);
}

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not a real number: " + it->second);
    }
}

int Config::get_int(const std::string& key, int fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const int v = std::stoi(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not an integer: " + it->second);
    }
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not a seed: " + it->second);
    }
}

std::vector<double> Config::get_list(const std::string& key) const {
    std::vector<double> out;
    const auto it = entries_.find(key);
    if (it == entries_.end()) return out;
    std::string s = it->second;
    for (char& c : s)
        if (c == ',') c = ' ';
    std::istringstream ss(s);
    double v;
    while (ss >> v) out.push_back(v);
    if (!ss.eof())
        throw ConfigError("config key " + key + ": not a list of reals: " + it->second);
    return out;
}

SolverConfig Config::solver() const {
    SolverConfig s;
    s.p = get_double("solver.p", s.p);
    s.energy_tol = get_double("solver.energy_tol", s.energy_tol);
    s.grad_tol = get_double("solver.grad_tol", s.grad_tol);
    s.max_iterations = get_int("solver.max_iter", s.max_iterations);
    s.shrink = get_double("solver.shrink", s.shrink);
    s.reg_eps = get_double("solver.reg_eps", s.reg_eps);
    const std::string mode = get_string("solver.mode", "chart");
    if (mode == "chart")
        s.mode = GradientMode::chart;
    else if (mode == "edge")
        s.mode = GradientMode::edge;
    else
        throw ConfigError("config key solver.mode: expected chart or edge, got " + mode);
    s.log_path = get_string("solver.log", "");
    s.validate();
    return s;
}

} // namespace greenpot
