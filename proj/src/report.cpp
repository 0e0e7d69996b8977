#include "greenpot/report.hpp"

#include <ostream>
#include <sstream>

#include "greenpot/util.hpp"

namespace greenpot {

bool Report::all_pass() const {
    for (const auto& r : rows)
        if (!r.pass) return false;
    return true;
}

int Report::failures() const {
    int n = 0;
    for (const auto& r : rows)
        if (!r.pass) ++n;
    return n;
}

void Report::add(std::string instance, std::string quantity, double value,
                 double bound_low, double bound_high) {
    ReportRow row;
    row.instance = std::move(instance);
    row.quantity = std::move(quantity);
    row.value = value;
    row.bound_low = bound_low;
    row.bound_high = bound_high;
    row.pass = value >= bound_low && value <= bound_high;
    rows.push_back(std::move(row));
}

void Report::append(const Report& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

void Report::write_csv(std::ostream& os) const {
    os << "instance_id,quantity,value,bound_low,bound_high,pass\n";
    for (const auto& r : rows) {
        os << r.instance << "," << r.quantity << "," << format_double(r.value) << ","
           << format_double(r.bound_low) << "," << format_double(r.bound_high) << ","
           << (r.pass ? "1" : "0") << "\n";
    }
}

std::string Report::to_csv() const {
    std::ostringstream ss;
    write_csv(ss);
    return ss.str();
}

} // namespace greenpot
