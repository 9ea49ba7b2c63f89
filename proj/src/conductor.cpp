#include "linetherm/conductor.hpp"

#include <fstream>

#include "json.hpp"
#include "linetherm/util.hpp"

namespace linetherm {

void Conductor::validate() const {
    auto fail = [this](const std::string& what) {
        throw InputError("conductor '" + name + "': " + what);
    };
    if (name.empty()) fail("empty name");
    if (!(diameter_m > 0.0)) fail("diameter must be > 0");
    if (!(projected_area_m2_per_m > 0.0)) fail("projected area must be > 0");
    if (!(heat_capacity_j_per_m_c > 0.0)) fail("heat capacity must be > 0");
    if (!(resistance_ohm_per_m > 0.0)) fail("reference resistance must be > 0");
    if (resistance_slope_ohm_per_m_c < 0.0) fail("resistance slope must be >= 0");
    if (emissivity < 0.0 || emissivity > 1.0) fail("emissivity outside [0,1]");
    if (absorptivity < 0.0 || absorptivity > 1.0) fail("absorptivity outside [0,1]");
    if (bundle_count < 1) fail("bundle count must be >= 1");
}

namespace {

Conductor make(const char* name, double diameter_mm, double mcp,
               double r25_ohm_per_m, double slope, int bundle, double rated) {
    Conductor c;
    c.name = name;
    c.diameter_m = diameter_mm * 1e-3;
    c.projected_area_m2_per_m = c.diameter_m;
    c.heat_capacity_j_per_m_c = mcp;
    c.resistance_ohm_per_m = r25_ohm_per_m;
    c.resistance_ref_temp_c = 25.0;
    c.resistance_slope_ohm_per_m_c = slope;
    c.emissivity = 0.8;
    c.absorptivity = 0.8;
    c.bundle_count = bundle;
    c.rated_current_a = rated;
    return c;
}

}  // namespace

const std::vector<Conductor>& default_catalog() {
    // ACSR datasheet values: mCp from strand masses and specific heats,
    // resistance from published 25/75 degC AC tables.
    static const std::vector<Conductor> catalog = {
        make("Pheasant", 35.10, 2150.0, 4.50e-5, 1.80e-7, 4, 1200.0),
        make("Bittern", 34.16, 1890.0, 4.55e-5, 1.80e-7, 3, 1200.0),
        make("Cardinal", 30.38, 1580.0, 6.01e-5, 2.40e-7, 2, 1000.0),
        make("Drake", 28.14, 1310.0, 7.283e-5, 2.810e-7, 2, 1000.0),
        make("Ibis", 19.89, 655.0, 1.448e-4, 5.80e-7, 1, 530.0),
    };
    return catalog;
}

std::vector<Conductor> load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open catalog file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("catalog " + path + ": " + e.what());
    }
    if (!doc.is_array()) throw SchemaError("catalog must be a JSON array: " + path);

    std::vector<Conductor> out;
    for (const auto& rec : doc) {
        auto need = [&](const char* field) -> const nlohmann::json& {
            if (!rec.contains(field))
                throw SchemaError("catalog record missing field '" +
                                  std::string(field) + "' in " + path);
            return rec.at(field);
        };
        Conductor c;
        c.name = need("name").get<std::string>();
        c.diameter_m = need("diameter_mm").get<double>() * 1e-3;
        c.projected_area_m2_per_m = rec.contains("projected_area_mm_per_m")
                ? rec.at("projected_area_mm_per_m").get<double>() * 1e-3
                : c.diameter_m;
        c.heat_capacity_j_per_m_c = need("heat_capacity_j_per_m_c").get<double>();
        c.resistance_ohm_per_m = need("resistance_ohm_per_m").get<double>();
        c.resistance_ref_temp_c = rec.value("resistance_ref_temp_c", 25.0);
        c.resistance_slope_ohm_per_m_c =
                need("resistance_slope_ohm_per_m_c").get<double>();
        c.emissivity = rec.value("emissivity", 0.8);
        c.absorptivity = rec.value("absorptivity", 0.8);
        c.bundle_count = rec.value("bundle_count", 1);
        c.rated_current_a = rec.value("rated_current_a", 0.0);
        c.validate();
        out.push_back(std::move(c));
    }
    return out;
}

void save_catalog(const std::vector<Conductor>& catalog, const std::string& path) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& c : catalog) {
        doc.push_back({
                {"name", c.name},
                {"diameter_mm", c.diameter_m * 1e3},
                {"projected_area_mm_per_m", c.projected_area_m2_per_m * 1e3},
                {"heat_capacity_j_per_m_c", c.heat_capacity_j_per_m_c},
                {"resistance_ohm_per_m", c.resistance_ohm_per_m},
                {"resistance_ref_temp_c", c.resistance_ref_temp_c},
                {"resistance_slope_ohm_per_m_c", c.resistance_slope_ohm_per_m_c},
                {"emissivity", c.emissivity},
                {"absorptivity", c.absorptivity},
                {"bundle_count", c.bundle_count},
                {"rated_current_a", c.rated_current_a},
                {"provenance", "datasheet-derived"},
        });
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot write catalog file: " + path);
    out << doc.dump(2) << "\n";
}

const Conductor& find_conductor(const std::vector<Conductor>& catalog,
                                const std::string& name) {
    for (const auto& c : catalog)
        if (c.name == name) return c;
    throw InputError("unknown conductor: " + name);
}

}  // namespace linetherm
