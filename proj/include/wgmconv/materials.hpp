#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "wgmconv/errors.hpp"
#include "wgmconv/units.hpp"

namespace wgmconv {

// Optical and microwave refractive indices plus Pockels coefficients for one
// crystal (or coupling medium).  Indices are dimensionless; the optical pair
// refers to 1.55 um, the microwave pair to the sub-THz design band (a single
// value per polarization -- in-band dispersion is ignored).  Pockels
// coefficients are stored in pm/V.
struct MaterialRecord {
    std::string name;
    double n_opt_o = 0.0;
    double n_opt_e = 0.0;
    double n_mw_o = 0.0;
    double n_mw_e = 0.0;
    double r33_pm_v = 0.0;
    double r31_pm_v = 0.0;
    double r42_pm_v = 0.0;  // = r51
    std::string notes;

    void validate() const {
        auto idx = [&](double n, const char* what) {
            if (!(n > 1.0))
                throw Error("material '" + name + "': " + what + " must exceed 1 (got " +
                            std::to_string(n) + ")");
        };
        idx(n_opt_o, "n_opt_o");
        idx(n_opt_e, "n_opt_e");
        idx(n_mw_o, "n_mw_o");
        idx(n_mw_e, "n_mw_e");
        for (double r : {r33_pm_v, r31_pm_v, r42_pm_v})
            if (r < 0.0)
                throw Error("material '" + name + "': electro-optic coefficients must be >= 0");
    }

    bool operator==(const MaterialRecord& o) const {
        return name == o.name && n_opt_o == o.n_opt_o && n_opt_e == o.n_opt_e &&
               n_mw_o == o.n_mw_o && n_mw_e == o.n_mw_e && r33_pm_v == o.r33_pm_v &&
               r31_pm_v == o.r31_pm_v && r42_pm_v == o.r42_pm_v;
    }
};

// Pockels coefficient conversion between SI (pm/V) and Gaussian (esu).
inline double eo_coefficient_convert(double r_pm_v) {
    if (r_pm_v < 0.0) throw Error("electro-optic coefficient must be >= 0");
    return r_pm_v * constants::esu_per_pm_v;
}

inline double eo_coefficient_to_pm_v(double r_esu) {
    if (r_esu < 0.0) throw Error("electro-optic coefficient must be >= 0");
    return r_esu / constants::esu_per_pm_v;
}

namespace detail {

inline const std::map<std::string, MaterialRecord>& builtin_materials() {
    // The ordinary/extraordinary optical splits are chosen so that the
    // birefringence offset omega_0 (n_o - n_e)/n_e at omega_0 = 1.2e15 rad/s
    // comes out at the quoted 2*pi*6.6 THz (LiNbO3) and 2*pi*0.366 THz
    // (stoichiometric LiTaO3).
    static const std::map<std::string, MaterialRecord> db = [] {
        std::map<std::string, MaterialRecord> m;
        m["lithium-niobate"] = MaterialRecord{
            "lithium-niobate", 2.2119, 2.138, 6.72, 5.15, 29.0, 8.6, 28.0,
            "congruent LiNbO3; transparent 0.4-5 um; microwave values near 100 GHz"};
        m["lithium-tantalate"] = MaterialRecord{
            "lithium-tantalate", 2.1180, 2.12206, 6.5, 6.5, 30.5, 8.5, 20.0,
            "stoichiometric LiTaO3; optical index ~2.12 for both polarizations, "
            "split kept to carry the weak birefringence; r33-r31 ~ 22 pm/V"};
        m["fused-silica"] = MaterialRecord{
            "fused-silica", 1.444, 1.444, 1.9, 1.9, 0.0, 0.0, 0.0,
            "isotropic glass; low microwave loss, n = 1.9 at 100 GHz"};
        m["diamond"] = MaterialRecord{
            "diamond", 2.384, 2.384, 2.38, 2.38, 0.0, 0.0, 0.0,
            "coupling prism; n_p = 2.384 at 1.55 um"};
        for (auto& [k, v] : m) v.validate();
        return m;
    }();
    return db;
}

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

inline MaterialRecord material_lookup(const std::string& name) {
    const auto& db = detail::builtin_materials();
    auto it = db.find(name);
    if (it == db.end()) throw UnknownMaterial(name);
    return it->second;
}

inline bool material_known(const std::string& name) {
    return detail::builtin_materials().count(name) > 0;
}

// Loads a record from a structured text file: one `key = value` pair per
// line, '#' comments.  Numeric values may carry a unit suffix; for the
// electro-optic entries `pm/V` is accepted (and implied when absent).
inline MaterialRecord load_material_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open material file: " + path);
    MaterialRecord rec;
    std::string line;
    int lineno = 0;
    auto parse_number = [&](std::string text, const std::string& unit) -> double {
        text = detail::trim(text);
        if (!unit.empty() && text.size() > unit.size() &&
            text.compare(text.size() - unit.size(), unit.size(), unit) == 0)
            text = detail::trim(text.substr(0, text.size() - unit.size()));
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(text, &pos);
        } catch (const std::exception&) {
            throw ParseError(path, lineno, "expected a number, got '" + text + "'");
        }
        if (pos != text.size())
            throw ParseError(path, lineno, "trailing characters after number: '" + text + "'");
        return v;
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path, lineno, "expected 'key = value'");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key == "name") rec.name = val;
        else if (key == "notes") rec.notes = val;
        else if (key == "n_opt_o") rec.n_opt_o = parse_number(val, "");
        else if (key == "n_opt_e") rec.n_opt_e = parse_number(val, "");
        else if (key == "n_mw_o") rec.n_mw_o = parse_number(val, "");
        else if (key == "n_mw_e") rec.n_mw_e = parse_number(val, "");
        else if (key == "r33") rec.r33_pm_v = parse_number(val, "pm/V");
        else if (key == "r31") rec.r31_pm_v = parse_number(val, "pm/V");
        else if (key == "r42" || key == "r51") rec.r42_pm_v = parse_number(val, "pm/V");
        else throw ParseError(path, lineno, "unknown material field '" + key + "'");
    }
    if (rec.name.empty()) throw Error("material file " + path + " does not set 'name'");
    rec.validate();
    return rec;
}

// Lookup that also accepts a path to a record file (used by the CLI so a
// config can reference either a built-in identifier or a user file).
inline MaterialRecord material_lookup_or_load(const std::string& name_or_path) {
    if (material_known(name_or_path)) return material_lookup(name_or_path);
    if (name_or_path.find('.') != std::string::npos ||
        name_or_path.find('/') != std::string::npos)
        return load_material_file(name_or_path);
    throw UnknownMaterial(name_or_path);
}

}  // namespace wgmconv
