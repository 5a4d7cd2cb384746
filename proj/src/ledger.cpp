#include "hmlab/ledger.hpp"

#include <nlohmann/json.hpp>

#include "hmlab/errors.hpp"

namespace hmlab {

void ConstantsLedger::set(const std::string& name, double value, Provenance prov,
                          const std::vector<std::string>& deps) {
    for (const std::string& d : deps)
        if (!index_.count(d))
            throw UsageError("ledger: constant '" + name + "' depends on unknown/later '" + d +
                             "' (dependency order must be acyclic)");
    auto it = index_.find(name);
    if (it != index_.end()) {
        entries_[it->second].value = value;
        entries_[it->second].prov = prov;
        entries_[it->second].deps = deps;
        return;
    }
    index_[name] = entries_.size();
    entries_.push_back({name, value, prov, deps});
}

bool ConstantsLedger::has(const std::string& name) const { return index_.count(name) > 0; }

double ConstantsLedger::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw UsageError("ledger: unknown constant '" + name + "'");
    return entries_[it->second].value;
}

std::string ConstantsLedger::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const Entry& e : entries_) {
        nlohmann::json je;
        je["name"] = e.name;
        je["value"] = e.value;
        je["provenance"] = e.prov == Provenance::Fixed      ? "fixed"
                           : e.prov == Provenance::Measured ? "measured"
                                                            : "calibrated";
        je["deps"] = e.deps;
        j.push_back(je);
    }
    return j.dump(2);
}

} // namespace hmlab
