#include "hetflow/report.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

namespace hetflow {

void ResidualReport::add(const std::string& name, double value, double tol) {
    ResidualEntry e{name, value, tol, std::isfinite(value) && value <= tol};
    for (auto& x : entries_)
        if (x.name == name) {
            x = e;
            return;
        }
    entries_.push_back(e);
}

void ResidualReport::set_info(const std::string& key, double value) { info_[key] = value; }

void ResidualReport::set_label(const std::string& key, const std::string& value) { labels_[key] = value; }

bool ResidualReport::all_pass() const {
    for (const auto& e : entries_)
        if (!e.pass) return false;
    return true;
}

bool ResidualReport::has(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return true;
    return false;
}

const ResidualEntry& ResidualReport::get(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return e;
    throw std::out_of_range("no residual named " + name);
}

std::string ResidualReport::to_json(int indent) const {
    nlohmann::ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    nlohmann::ordered_json eq = nlohmann::ordered_json::object();
    for (const auto& e : entries_) {
        nlohmann::ordered_json v;
        v["value"] = std::isfinite(e.value) ? nlohmann::ordered_json(e.value) : nlohmann::ordered_json(nullptr);
        v["tol"] = e.tol;
        v["pass"] = e.pass;
        eq[e.name] = v;
    }
    j["equations"] = eq;
    j["pass"] = all_pass();
    if (!info_.empty()) j["info"] = info_;
    if (!labels_.empty()) j["labels"] = labels_;
    return j.dump(indent);
}

}  // namespace hetflow
