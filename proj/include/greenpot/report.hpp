#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace greenpot {

/// One verified quantity: value against its admissible interval.
struct ReportRow {
    std::string instance;
    std::string quantity;
    double value = 0.0;
    double bound_low = 0.0;
    double bound_high = 0.0;
    bool pass = false;
};

struct Report {
    std::vector<ReportRow> rows;

    bool all_pass() const;
    int failures() const;
    void add(std::string instance, std::string quantity, double value,
             double bound_low, double bound_high);
    void append(const Report& other);

    /// CSV with columns instance_id,quantity,value,bound_low,bound_high,pass
    void write_csv(std::ostream& os) const;
    std::string to_csv() const;
};

} // namespace greenpot
