/**
 * @file report.hpp
 * @brief Named residuals with tolerances, serialisable to a versioned JSON schema.
 */
#pragma once

#include <map>
#include <string>
#include <vector>

namespace hetflow {

inline constexpr int kReportSchemaVersion = 1;

struct ResidualEntry {
    std::string name;
    double value = 0.0;
    double tol = 0.0;
    bool pass = false;
};

class ResidualReport {
public:
    /// Adds or replaces an entry; pass is value ≤ tol (NaN fails).
    void add(const std::string& name, double value, double tol);
    void set_info(const std::string& key, double value);
    void set_label(const std::string& key, const std::string& value);

    bool all_pass() const;
    bool has(const std::string& name) const;
    const ResidualEntry& get(const std::string& name) const;
    const std::vector<ResidualEntry>& entries() const { return entries_; }
    const std::map<std::string, double>& info() const { return info_; }
    const std::map<std::string, std::string>& labels() const { return labels_; }

    /// {"schema_version":1,"equations":{name:{value,tol,pass}},"pass":..,"info":{..},"labels":{..}}
    std::string to_json(int indent = 2) const;

private:
    std::vector<ResidualEntry> entries_;
    std::map<std::string, double> info_;
    std::map<std::string, std::string> labels_;
};

}  // namespace hetflow
