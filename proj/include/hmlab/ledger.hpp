#pragma once

#include <map>
#include <string>
#include <vector>

namespace hmlab {

// Registry for the run's numeric constants. Each entry records how the
// value was obtained and which earlier constants it depends on; insertion
// order is the dependency order, so an entry may only depend on names that
// are already present (this rejects cycles by construction).
class ConstantsLedger {
  public:
    enum class Provenance { Fixed, Measured, Calibrated };

    void set(const std::string& name, double value, Provenance prov,
             const std::vector<std::string>& deps = {});
    bool has(const std::string& name) const;
    double get(const std::string& name) const;

    std::string to_json() const;

    struct Entry {
        std::string name;
        double value = 0.0;
        Provenance prov = Provenance::Fixed;
        std::vector<std::string> deps;
    };
    const std::vector<Entry>& entries() const { return entries_; }

  private:
    std::vector<Entry> entries_;
    std::map<std::string, std::size_t> index_;
};

} // namespace hmlab
