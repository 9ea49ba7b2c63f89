#pragma once

#include <string>
#include <vector>

namespace linetherm {

/// Physical and electrical description of one conductor (one sub-conductor of
/// a bundle). Resistance follows the linear law
/// R(T) = resistance_ohm_per_m + resistance_slope * (T - resistance_ref_temp_c).
struct Conductor {
    std::string name;
    double diameter_m = 0.0;
    double projected_area_m2_per_m = 0.0;  // equals diameter for a round conductor
    double heat_capacity_j_per_m_c = 0.0;  // mCp
    double resistance_ohm_per_m = 0.0;     // at resistance_ref_temp_c
    double resistance_ref_temp_c = 25.0;
    double resistance_slope_ohm_per_m_c = 0.0;
    double emissivity = 0.8;
    double absorptivity = 0.8;
    int bundle_count = 1;
    double rated_current_a = 0.0;

    double resistance_at(double temp_c) const {
        return resistance_ohm_per_m +
               resistance_slope_ohm_per_m_c * (temp_c - resistance_ref_temp_c);
    }

    /// Line current divided across the bundle.
    double subconductor_current(double line_current_a) const {
        return line_current_a / static_cast<double>(bundle_count);
    }

    /// Throws InputError on a physically invalid record.
    void validate() const;
};

/// The built-in catalog: Pheasant, Bittern, Cardinal, Drake, Ibis ACSR with
/// datasheet-derived parameters.
const std::vector<Conductor>& default_catalog();

/// Loads a JSON catalog file (diameters in mm on disk, converted to meters).
std::vector<Conductor> load_catalog(const std::string& path);

/// Writes a catalog in the on-disk JSON schema.
void save_catalog(const std::vector<Conductor>& catalog, const std::string& path);

/// Finds a conductor by name; throws InputError when absent.
const Conductor& find_conductor(const std::vector<Conductor>& catalog,
                                const std::string& name);

}  // namespace linetherm
