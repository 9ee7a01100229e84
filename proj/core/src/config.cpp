#include "ptrap/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "ptrap/error.hpp"
#include "ptrap/io.hpp"

namespace ptrap {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

// Wraps a precondition failure from a type's validate() as a field error.
template <typename F>
void check(const std::string& field, F&& f) {
    try {
        f();
    } catch (const PreconditionError& e) {
        throw ConfigError(field, e.what());
    }
}

// One JSON object being read. Every key must be consumed; finish() reports
// the first one that was not.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string at(std::string_view key) const { return join(path_, key); }

    const json* find(const char* key) {
        used_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    bool number(const char* key, double& out) {
        const json* v = find(key);
        if (!v) return false;
        if (!v->is_number()) throw ConfigError(at(key), "expected a number");
        const double d = v->get<double>();
        if (!std::isfinite(d)) throw ConfigError(at(key), "must be finite");
        out = d;
        return true;
    }

    void count(const char* key, std::size_t& out) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_number_integer() || v->get<long long>() < 0)
            throw ConfigError(at(key), "expected a non-negative integer");
        out = v->get<std::size_t>();
    }

    bool string(const char* key, std::string& out) {
        const json* v = find(key);
        if (!v) return false;
        if (!v->is_string()) throw ConfigError(at(key), "expected a string");
        out = v->get<std::string>();
        return true;
    }

    void vec3(const char* key, Vec3& out) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_array() || v->size() != 3) throw ConfigError(at(key), "expected an array of 3 numbers");
        for (std::size_t i = 0; i < 3; ++i) {
            if (!(*v)[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
            out[i] = (*v)[i].get<double>();
        }
    }

    void numbers(const char* key, std::vector<double>& out) {
        const json* v = find(key);
        if (!v) return;
        if (v->is_object()) {
            // {start, stop, step}, inclusive of stop
            Obj r(*v, at(key));
            double start = 0.0, stop = 0.0, step = 0.0;
            if (!r.number("start", start)) throw ConfigError(r.at("start"), "required");
            if (!r.number("stop", stop)) throw ConfigError(r.at("stop"), "required");
            if (!r.number("step", step)) throw ConfigError(r.at("step"), "required");
            r.finish();
            if (!(step > 0.0) || stop < start) throw ConfigError(at(key), "need step > 0 and stop >= start");
            const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
            if (n > 100000) throw ConfigError(at(key), "range has too many points");
            out.clear();
            for (std::size_t i = 0; i < n; ++i) out.push_back(start + static_cast<double>(i) * step);
            return;
        }
        if (!v->is_array()) throw ConfigError(at(key), "expected an array of numbers or {start, stop, step}");
        out.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back((*v)[i].get<double>());
        }
    }

    std::vector<std::string> strings(const char* key) {
        const json* v = find(key);
        std::vector<std::string> out;
        if (!v) return out;
        if (!v->is_array()) throw ConfigError(at(key), "expected an array of strings");
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_string()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a string");
            out.push_back((*v)[i].get<std::string>());
        }
        if (out.empty()) throw ConfigError(at(key), "must not be empty");
        return out;
    }

    void finish() const {
        for (const auto& item : j_.items())
            if (!used_.count(item.key())) throw ConfigError(at(item.key()), "unknown field");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

void apply_override(json& root, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(spec, "override must look like path=value");
    const std::string path = spec.substr(0, eq);
    const std::string text = spec.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &root;
    std::string walked;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError(path, "empty path component");
        walked = join(walked, key);
        if (!node->is_object()) throw ConfigError(walked, "cannot set a field inside a non-object value");
        if (dot == std::string::npos) {
            (*node)[key] = std::move(value);
            return;
        }
        json& next = (*node)[key];
        if (next.is_null()) next = json::object();
        node = &next;
        start = dot + 1;
    }
}

void read_geometry(Obj& root, RunConfig& c) {
    const json* g = root.find("geometry");
    if (!g) return;
    Obj o(*g, "geometry");
    std::string preset = "paper";
    o.string("preset", preset);
    if (preset == "paper")
        c.geometry = make_paper_trap();
    else if (preset == "ideal")
        c.geometry = TrapGeometry::ideal(0.020);
    else
        throw ConfigError(o.at("preset"), "expected \"paper\" or \"ideal\"");

    double r0 = c.geometry.r0;
    if (o.number("r0", r0)) {
        // z0 and the truncation follow r0 unless given explicitly
        c.geometry.r0 = r0;
        c.geometry.z0 = r0 / std::sqrt(2.0);
        c.geometry.truncation_radius = 2.0 * r0;
    }
    o.number("z0", c.geometry.z0);
    o.number("truncation_radius", c.geometry.truncation_radius);

    if (const json* p = o.find("electrode_potentials")) {
        Obj po(*p, o.at("electrode_potentials"));
        po.number("ring", c.geometry.potentials.ring);
        po.number("endcap", c.geometry.potentials.endcap);
        po.number("filament", c.geometry.potentials.filament);
        po.finish();
    }
    if (const json* f = o.find("filament")) {
        if (f->is_null()) {
            c.geometry.filament.reset();
        } else {
            FilamentConfig fc = c.geometry.filament.value_or(FilamentConfig{});
            Obj fo(*f, o.at("filament"));
            fo.number("length", fc.length);
            fo.number("width", fc.width);
            fo.number("thickness", fc.thickness);
            fo.number("height_above_lower_endcap", fc.height_above_lower_endcap);
            fo.number("lateral_offset_x", fc.lateral_offset_x);
            std::string orient;
            if (fo.string("orientation", orient))
                check(fo.at("orientation"), [&] { fc.orientation = parse_filament_orientation(orient); });
            fo.finish();
            c.geometry.filament = fc;
        }
    }
    o.finish();
    check("geometry", [&] { c.geometry.validate(); });
}

void read_grid(Obj& root, RunConfig& c) {
    c.grid = GridSpec::default_for(c.geometry.r0);
    if (const json* g = root.find("grid")) {
        Obj o(*g, "grid");
        o.count("nx", c.grid.nx);
        o.count("ny", c.grid.ny);
        o.count("nz", c.grid.nz);
        if (const json* e = o.find("extent"); e && !e->is_null()) o.number("extent", c.grid.extent);
        o.number("tolerance", c.solver.tolerance);
        o.count("max_iterations", c.solver.max_iterations);
        std::string boundary;
        if (o.string("boundary", boundary)) {
            if (boundary == "shortley_weller")
                c.solver.boundary = BoundaryTreatment::shortley_weller;
            else if (boundary == "staircase")
                c.solver.boundary = BoundaryTreatment::staircase;
            else
                throw ConfigError(o.at("boundary"), "expected \"shortley_weller\" or \"staircase\"");
        }
        if (const json* r = o.find("relaxation"); r && !r->is_null()) {
            double w = 0.0;
            o.number("relaxation", w);
            if (!(w > 0.0 && w < 2.0)) throw ConfigError(o.at("relaxation"), "must lie in (0, 2)");
            c.solver.relaxation = w;
        }
        o.finish();
    }
    check("grid", [&] { c.grid.validate(c.geometry.r0); });
    if (!(c.solver.tolerance > 0.0)) throw ConfigError("grid.tolerance", "must be positive");
    if (c.solver.max_iterations == 0) throw ConfigError("grid.max_iterations", "must be positive");

    if (const json* f = root.find("fit")) {
        Obj o(*f, "fit");
        o.number("region_radius", c.fit_region_radius);
        o.finish();
    }
    const double limit = max_fit_region_radius(c.geometry, c.grid);
    if (!(c.fit_region_radius > 0.0 && c.fit_region_radius <= limit))
        throw ConfigError("fit.region_radius", "must lie in (0, " + std::to_string(limit) + "] m for this geometry");
}

void read_ion(Obj& root, RunConfig& c) {
    const json* i = root.find("ion");
    if (!i) return;
    Obj o(*i, "ion");
    std::string species;
    const bool named = o.string("species", species);
    double mass_u = 0.0;
    const bool by_mass = o.number("mass_u", mass_u);
    double charge_state = 1.0;
    o.number("charge_state", charge_state);
    std::string label;
    o.string("label", label);
    o.finish();
    if (named && by_mass) throw ConfigError("ion", "give either species or mass_u, not both");
    if (named) {
        check(o.at("species"), [&] { c.ion = species_by_name(species); });
        if (charge_state != 1.0) {
            if (charge_state != std::round(charge_state) || charge_state == 0.0)
                throw ConfigError(o.at("charge_state"), "must be a non-zero integer");
            c.ion.charge = charge_state * PhysicalConstants::elementary_charge;
        }
        if (!label.empty()) c.ion.label = label;
    } else if (by_mass) {
        if (charge_state != std::round(charge_state) || charge_state == 0.0)
            throw ConfigError(o.at("charge_state"), "must be a non-zero integer");
        check(o.at("mass_u"), [&] {
            c.ion = IonSpecies::from_atomic_mass(label.empty() ? "custom" : label, mass_u,
                                                 static_cast<int>(charge_state));
        });
    } else if (!label.empty() || charge_state != 1.0) {
        throw ConfigError(o.at("species"), "species or mass_u is required");
    }
}

void read_operating_point(Obj& root, RunConfig& c) {
    const json* p = root.find("operating_point");
    if (!p) return;
    Obj o(*p, "operating_point");
    o.number("u_dc", c.operating_point.u_dc);
    o.number("v_rf", c.operating_point.v_rf);
    const bool angular = o.number("drive_angular_frequency", c.operating_point.drive_angular_frequency);
    double hz = 0.0;
    if (o.number("drive_frequency_hz", hz)) {
        if (angular) throw ConfigError("operating_point", "give drive_angular_frequency or drive_frequency_hz, not both");
        c.operating_point.drive_angular_frequency = 2.0 * kPi * hz;
    }
    o.finish();
    check("operating_point", [&] { c.operating_point.validate(); });
}

void read_integration(Obj& root, RunConfig& c) {
    if (const json* p = root.find("integration")) {
        Obj o(*p, "integration");
        o.count("steps_per_rf_period", c.integration.steps_per_rf_period);
        o.count("rf_periods", c.integration.rf_periods);
        o.vec3("initial_position", c.integration.initial_position);
        o.vec3("initial_velocity", c.integration.initial_velocity);
        o.finish();
    }
    check("integration", [&] { c.integration.validate(); });
}

MultipoleCoefficients inline_coefficients(Obj& o) {
    std::array<double, 6> v{};
    for (std::size_t i = 0; i < 6; ++i) {
        const std::string name(MultipoleCoefficients::names[i]);
        if (!o.number(name.c_str(), v[i])) throw ConfigError(o.at(name), "required for inline coefficients");
    }
    return MultipoleCoefficients::from_values(v);
}

void read_coefficients(Obj& root, RunConfig& c, const std::filesystem::path& base_dir) {
    const json* p = root.find("coefficients");
    if (!p) return;
    if (p->is_string()) {
        const std::string key = p->get<std::string>();
        if (key == "paper-table1") {
            c.coefficients = paper_table_coefficients();
        } else if (key == "ideal") {
            c.coefficients = ideal_coefficients();
        } else {
            throw ConfigError("coefficients", "expected \"paper-table1\", \"ideal\", {\"file\": ...} or inline values");
        }
        c.coefficients_source = key;
        return;
    }
    Obj o(*p, "coefficients");
    std::string file;
    if (o.string("file", file)) {
        o.finish();
        std::filesystem::path path(file);
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        try {
            c.coefficients = fit_report_from_json(read_file(path)).coefficients;
        } catch (const ConfigError& e) {
            throw ConfigError("coefficients.file", e.what());
        } catch (const Error& e) {
            throw ConfigError("coefficients.file", e.what());
        }
        c.coefficients_source = path.string();
        return;
    }
    std::string source = "inline";
    o.string("source", source);
    c.coefficients = inline_coefficients(o);
    c.coefficients_source = source;
    o.finish();
}

void read_experiments(Obj& root, RunConfig& c) {
    if (const json* p = root.find("trace")) {
        Obj o(*p, "trace");
        o.number("target_hz", c.trace.target_hz);
        o.numbers("v_rf", c.trace.v_rf);
        if (const auto axes = o.strings("axes"); !axes.empty()) {
            c.trace.axes.clear();
            for (std::size_t i = 0; i < axes.size(); ++i)
                check(o.at("axes") + "[" + std::to_string(i) + "]",
                      [&] { c.trace.axes.push_back(parse_axis(axes[i])); });
        }
        if (const auto models = o.strings("models"); !models.empty()) {
            c.trace.models.clear();
            for (std::size_t i = 0; i < models.size(); ++i)
                check(o.at("models") + "[" + std::to_string(i) + "]",
                      [&] { c.trace.models.push_back(parse_frequency_model(models[i])); });
        }
        o.number("tolerance_hz", c.trace.tolerance_hz);
        o.number("u_dc_low", c.trace.u_dc_low);
        o.number("u_dc_high", c.trace.u_dc_high);
        o.finish();
    }
    if (!(c.trace.target_hz > 0.0)) throw ConfigError("trace.target_hz", "must be positive");
    if (c.trace.v_rf.empty()) throw ConfigError("trace.v_rf", "must not be empty");
    if (!(c.trace.tolerance_hz > 0.0)) throw ConfigError("trace.tolerance_hz", "must be positive");
    if (!(c.trace.u_dc_low < c.trace.u_dc_high)) throw ConfigError("trace.u_dc_high", "must exceed u_dc_low");

    if (const json* p = root.find("sweep")) {
        Obj o(*p, "sweep");
        o.numbers("heights", c.sweep.heights);
        o.number("u_dc", c.sweep.u_dc);
        o.number("v_rf", c.sweep.v_rf);
        o.finish();
    }
    if (c.sweep.heights.empty()) throw ConfigError("sweep.heights", "must not be empty");

    if (const json* p = root.find("output")) {
        Obj o(*p, "output");
        o.count("trajectory_stride", c.output.trajectory_stride);
        o.number("spectrum_max_hz", c.output.spectrum_max_hz);
        o.finish();
    }
    if (c.output.trajectory_stride == 0) throw ConfigError("output.trajectory_stride", "must be positive");
    if (!(c.output.spectrum_max_hz > 0.0)) throw ConfigError("output.spectrum_max_hz", "must be positive");
}

bool named_species_matches(const IonSpecies& ion) {
    try {
        const IonSpecies named = species_by_name(ion.label);
        return named.mass == ion.mass && std::remainder(ion.charge, PhysicalConstants::elementary_charge) == 0.0;
    } catch (const PreconditionError&) {
        return false;
    }
}

ordered_json vec3_json(const Vec3& v) { return ordered_json::array({v[0], v[1], v[2]}); }

}  // namespace

TraceSetup RunConfig::trace_setup() const {
    TraceSetup s;
    s.ion = ion;
    s.geometry = geometry;
    s.drive_angular_frequency = operating_point.drive_angular_frequency;
    s.coefficients = coefficients;
    s.integration = integration;
    s.tolerance_hz = trace.tolerance_hz;
    s.u_dc_low = trace.u_dc_low;
    s.u_dc_high = trace.u_dc_high;
    return s;
}

PipelineOptions RunConfig::pipeline_options() const {
    return PipelineOptions{grid, solver, fit_region_radius, integration};
}

RunConfig parse_run_config(std::string_view json_text, std::span<const std::string> overrides,
                           const std::filesystem::path& base_dir) {
    json root = json::object();
    const bool blank = json_text.find_first_not_of(" \t\r\n") == std::string_view::npos;
    if (!blank) {
        try {
            root = json::parse(json_text);
        } catch (const json::parse_error& e) {
            throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
        }
    }
    if (!root.is_object()) throw ConfigError("<root>", "expected an object");
    for (const auto& o : overrides) apply_override(root, o);

    RunConfig c;
    Obj r(root, "");
    read_geometry(r, c);
    read_grid(r, c);
    read_ion(r, c);
    read_operating_point(r, c);
    read_integration(r, c);
    read_coefficients(r, c, base_dir);
    read_experiments(r, c);
    r.finish();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        throw ConfigError("<config>", e.what());
    }
    return parse_run_config(text, overrides, path.parent_path());
}

std::string resolved_config_json(const RunConfig& c, int indent) {
    ordered_json j;
    const TrapGeometry& g = c.geometry;
    ordered_json geom;
    geom["r0"] = g.r0;
    geom["z0"] = g.z0;
    geom["truncation_radius"] = g.truncation_radius;
    geom["electrode_potentials"] = {{"ring", g.potentials.ring},
                                    {"endcap", g.potentials.endcap},
                                    {"filament", g.potentials.filament}};
    if (g.filament) {
        const FilamentConfig& f = *g.filament;
        geom["filament"] = {{"length", f.length},
                            {"width", f.width},
                            {"thickness", f.thickness},
                            {"height_above_lower_endcap", f.height_above_lower_endcap},
                            {"lateral_offset_x", f.lateral_offset_x},
                            {"orientation", std::string(to_string(f.orientation))}};
    } else {
        geom["filament"] = nullptr;
    }
    j["geometry"] = geom;

    ordered_json grid;
    grid["nx"] = c.grid.nx;
    grid["ny"] = c.grid.ny;
    grid["nz"] = c.grid.nz;
    grid["extent"] = c.grid.extent;
    grid["tolerance"] = c.solver.tolerance;
    grid["max_iterations"] = c.solver.max_iterations;
    grid["boundary"] = c.solver.boundary == BoundaryTreatment::shortley_weller ? "shortley_weller" : "staircase";
    grid["relaxation"] = c.solver.relaxation ? ordered_json(*c.solver.relaxation) : ordered_json(nullptr);
    j["grid"] = grid;
    j["fit"] = {{"region_radius", c.fit_region_radius}};

    const double charge_state = std::round(c.ion.charge / PhysicalConstants::elementary_charge);
    if (named_species_matches(c.ion)) {
        j["ion"] = {{"species", c.ion.label}, {"charge_state", charge_state}};
    } else {
        j["ion"] = {{"label", c.ion.label},
                    {"mass_u", c.ion.mass / PhysicalConstants::atomic_mass_unit},
                    {"charge_state", charge_state}};
    }
    j["operating_point"] = {{"u_dc", c.operating_point.u_dc},
                            {"v_rf", c.operating_point.v_rf},
                            {"drive_angular_frequency", c.operating_point.drive_angular_frequency}};
    j["integration"] = {{"steps_per_rf_period", c.integration.steps_per_rf_period},
                        {"rf_periods", c.integration.rf_periods},
                        {"initial_position", vec3_json(c.integration.initial_position)},
                        {"initial_velocity", vec3_json(c.integration.initial_velocity)}};

    ordered_json coeffs;
    coeffs["source"] = c.coefficients_source;
    const auto vals = c.coefficients.values();
    for (std::size_t i = 0; i < 6; ++i) coeffs[std::string(MultipoleCoefficients::names[i])] = vals[i];
    j["coefficients"] = coeffs;

    ordered_json axes = ordered_json::array(), models = ordered_json::array();
    for (Axis a : c.trace.axes) axes.push_back(std::string(to_string(a)));
    for (FrequencyModel m : c.trace.models) models.push_back(std::string(to_string(m)));
    j["trace"] = {{"target_hz", c.trace.target_hz},
                  {"v_rf", c.trace.v_rf},
                  {"axes", axes},
                  {"models", models},
                  {"tolerance_hz", c.trace.tolerance_hz},
                  {"u_dc_low", c.trace.u_dc_low},
                  {"u_dc_high", c.trace.u_dc_high}};
    j["sweep"] = {{"heights", c.sweep.heights}, {"u_dc", c.sweep.u_dc}, {"v_rf", c.sweep.v_rf}};
    j["output"] = {{"trajectory_stride", c.output.trajectory_stride},
                   {"spectrum_max_hz", c.output.spectrum_max_hz}};
    return j.dump(indent);
}

}  // namespace ptrap
