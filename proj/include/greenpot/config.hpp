#pragma once

#include <map>
#include <optional>
#include <string>

#include "greenpot/dirichlet.hpp"

namespace greenpot {

/// Flat sectioned key=value experiment configuration. Keys are addressed as
/// "section.key"; '#' starts a comment; no nesting.
class Config {
public:
    Config() = default;

    static Config parse(std::istream& is);
    static Config load(const std::string& path);

    void set(const std::string& key, std::string value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback = "") const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;

    /// Comma- or space-separated list of reals.
    std::vector<double> get_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

    /// [solver] section -> SolverConfig (validated).
    SolverConfig solver() const;

private:
    std::map<std::string, std::string> entries_;
};

} // namespace greenpot
