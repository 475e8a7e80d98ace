#include "pds/run.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "pds/rare.hpp"
#include "pds/statlin.hpp"

namespace pds {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kPdfHeader =
    "value,density,log10_density,background_component,rare_component";
constexpr const char* kMcHeader = "value,count,density";
constexpr const char* kValidateHeader =
    "value,mc_count,mc_density,pds_density,log10_diff,masked";
constexpr const char* kSurfaceHeader = "param1,param2,objective,gamma";

// ---------------------------------------------------------------- parsing

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw ConfigError("config: " + where + " must be an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (item.key() == a) { known = true; break; }
        if (!known)
            throw ConfigError("config: unknown key '" + item.key() + "' in " +
                              where);
    }
}

const json& field(const json& j, const std::string& where, const char* key) {
    auto it = j.find(key);
    if (it == j.end())
        throw ConfigError("config: missing key '" + std::string(key) +
                          "' in " + where);
    return *it;
}

double num(const json& j, const std::string& where, const char* key) {
    const json& v = field(j, where, key);
    if (!v.is_number())
        throw ConfigError("config: " + where + "." + key + " must be a number");
    return v.get<double>();
}

double num_or(const json& j, const std::string& where, const char* key,
              double fallback) {
    return j.contains(key) ? num(j, where, key) : fallback;
}

std::size_t count_or(const json& j, const std::string& where, const char* key,
                     std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_unsigned())
        throw ConfigError("config: " + where + "." + key +
                          " must be a non-negative integer");
    return v.get<std::size_t>();
}

bool flag_or(const json& j, const std::string& where, const char* key,
             bool fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean())
        throw ConfigError("config: " + where + "." + key + " must be a boolean");
    return v.get<bool>();
}

std::string text(const json& j, const std::string& where, const char* key) {
    const json& v = field(j, where, key);
    if (!v.is_string())
        throw ConfigError("config: " + where + "." + key + " must be a string");
    return v.get<std::string>();
}

SpringLaw parse_spring(const json& j) {
    check_keys(j, "system.spring",
               {"kind", "k", "c", "alpha_pos", "alpha_neg", "knee"});
    const std::string kind = text(j, "system.spring", "kind");
    if (kind == "linear")
        return SpringLaw::linear(num_or(j, "system.spring", "k", 0.0));
    if (kind == "cubic")
        return SpringLaw::cubic(num_or(j, "system.spring", "k", 0.0),
                                num(j, "system.spring", "c"));
    if (kind == "piecewise")
        return SpringLaw::piecewise(num_or(j, "system.spring", "k", 0.0),
                                    num(j, "system.spring", "alpha_pos"),
                                    num(j, "system.spring", "alpha_neg"),
                                    num(j, "system.spring", "knee"));
    throw ConfigError("config: system.spring.kind must be linear, cubic or "
                      "piecewise");
}

SystemModel parse_system(const json& j) {
    check_keys(j, "system",
               {"topology", "m_s", "lambda_s", "k_s", "m_a", "lambda_a", "m_h",
                "lambda_h", "k_h", "spring"});
    SystemModel m;
    const std::string topo = text(j, "system", "topology");
    if (topo == "sdof") m.topology = Topology::sdof;
    else if (topo == "seat2dof") m.topology = Topology::seat2dof;
    else if (topo == "deckseat3dof") m.topology = Topology::deckseat3dof;
    else
        throw ConfigError(
            "config: system.topology must be sdof, seat2dof or deckseat3dof");
    m.m_s = num_or(j, "system", "m_s", m.m_s);
    m.lambda_s = num_or(j, "system", "lambda_s", m.lambda_s);
    m.k_s = num_or(j, "system", "k_s", m.k_s);
    m.m_a = num_or(j, "system", "m_a", m.m_a);
    m.lambda_a = num_or(j, "system", "lambda_a", m.lambda_a);
    m.m_h = num_or(j, "system", "m_h", m.m_h);
    m.lambda_h = num_or(j, "system", "lambda_h", m.lambda_h);
    m.k_h = num_or(j, "system", "k_h", m.k_h);
    if (j.contains("spring")) m.spring = parse_spring(j.at("spring"));
    m.validate();
    return m;
}

ForcingModel parse_forcing(const json& j) {
    check_keys(j, "forcing",
               {"q", "shift", "T_alpha", "beta", "mu_alpha", "sigma_alpha",
                "pattern"});
    BackgroundSpectrum spectrum;
    spectrum.q = num_or(j, "forcing", "q", spectrum.q);
    spectrum.shift = num_or(j, "forcing", "shift", spectrum.shift);

    ImpulsePattern pattern = ImpulsePattern::primary_only;
    if (j.contains("pattern")) {
        const std::string p = text(j, "forcing", "pattern");
        if (p == "primary_only") pattern = ImpulsePattern::primary_only;
        else if (p == "all_dofs") pattern = ImpulsePattern::all_dofs;
        else
            throw ConfigError(
                "config: forcing.pattern must be primary_only or all_dofs");
    }

    const double T_alpha = num_or(j, "forcing", "T_alpha", 5000.0);
    const bool has_beta = j.contains("beta");
    const bool has_mu = j.contains("mu_alpha");
    if (has_beta == has_mu)
        throw ConfigError(
            "config: forcing needs exactly one of beta or mu_alpha");

    ForcingModel f;
    if (has_beta) {
        f = ForcingModel::from_beta(spectrum, T_alpha,
                                    num(j, "forcing", "beta"), pattern);
        f.sigma_alpha = num_or(j, "forcing", "sigma_alpha", f.sigma_alpha);
    } else {
        f.spectrum = spectrum;
        f.T_alpha = T_alpha;
        f.mu_alpha = num(j, "forcing", "mu_alpha");
        f.sigma_alpha = num(j, "forcing", "sigma_alpha");
        f.pattern = pattern;
    }
    f.validate();
    return f;
}

Quantity parse_quantity(const SystemModel& system, const std::string& label,
                        const std::string& where) {
    for (Quantity q : all_quantities(system))
        if (quantity_label(system.topology, q) == label) return q;
    throw ConfigError("config: " + where + ": unknown quantity '" + label +
                      "' for this topology");
}

void parse_solver(const json& j, RunConfig& c) {
    check_keys(j, "solver",
               {"statlin_damping", "statlin_tol", "statlin_max_iter",
                "eta_nodes", "eta_span", "rho_c", "rare_dt_out", "rare_rtol",
                "bins_per_impulse", "mixture_bins", "horizon_periods",
                "energy_cutoff", "grid_points", "background_span",
                "rare_margin", "mc_realizations", "mc_impulses", "mc_dt",
                "mc_frequency_bins", "mc_min_duration", "mc_provisional_bins",
                "mc_dt_out", "mc_rtol"});
    c.statlin.damping = num_or(j, "solver", "statlin_damping", c.statlin.damping);
    c.statlin.tol = num_or(j, "solver", "statlin_tol", c.statlin.tol);
    c.statlin.max_iter = count_or(j, "solver", "statlin_max_iter", c.statlin.max_iter);
    c.rare.eta_nodes = count_or(j, "solver", "eta_nodes", c.rare.eta_nodes);
    c.rare.eta_span = num_or(j, "solver", "eta_span", c.rare.eta_span);
    c.rare.rho_c = num_or(j, "solver", "rho_c", c.rare.rho_c);
    c.rare.dt_out = num_or(j, "solver", "rare_dt_out", c.rare.dt_out);
    c.rare.rtol = num_or(j, "solver", "rare_rtol", c.rare.rtol);
    c.rare.bins_per_impulse =
        count_or(j, "solver", "bins_per_impulse", c.rare.bins_per_impulse);
    c.rare.mixture_bins =
        count_or(j, "solver", "mixture_bins", c.rare.mixture_bins);
    c.rare.horizon_periods =
        num_or(j, "solver", "horizon_periods", c.rare.horizon_periods);
    c.rare.energy_cutoff =
        num_or(j, "solver", "energy_cutoff", c.rare.energy_cutoff);
    c.synthesis.grid_points =
        count_or(j, "solver", "grid_points", c.synthesis.grid_points);
    c.synthesis.background_span =
        num_or(j, "solver", "background_span", c.synthesis.background_span);
    c.synthesis.rare_margin =
        num_or(j, "solver", "rare_margin", c.synthesis.rare_margin);
    c.mc.realizations = count_or(j, "solver", "mc_realizations", c.mc.realizations);
    c.mc.impulses_each = count_or(j, "solver", "mc_impulses", c.mc.impulses_each);
    c.mc.dt = num_or(j, "solver", "mc_dt", c.mc.dt);
    c.mc.frequency_bins =
        count_or(j, "solver", "mc_frequency_bins", c.mc.frequency_bins);
    c.mc.min_duration = num_or(j, "solver", "mc_min_duration", c.mc.min_duration);
    c.mc.provisional_bins =
        count_or(j, "solver", "mc_provisional_bins", c.mc.provisional_bins);
    c.mc.sim.dt_out = num_or(j, "solver", "mc_dt_out", c.mc.sim.dt_out);
    c.mc.sim.rtol = num_or(j, "solver", "mc_rtol", c.mc.sim.rtol);
}

AxisSpec parse_axis(const json& j, const std::string& where, AxisSpec axis) {
    check_keys(j, where, {"min", "max", "count", "log"});
    axis.min = num_or(j, where, "min", axis.min);
    axis.max = num_or(j, where, "max", axis.max);
    axis.count = count_or(j, where, "count", axis.count);
    axis.log_spaced = flag_or(j, where, "log", axis.log_spaced);
    axis.validate();
    return axis;
}

OptimizeSection parse_optimize(const json& j, const SystemModel& system) {
    check_keys(j, "optimize",
               {"family", "objective", "lambda", "coupling", "alpha_pos",
                "alpha_neg", "refine", "eta_nodes", "overlays"});
    OptimizeSection s;
    const std::string family = text(j, "optimize", "family");
    if (family == "tmd") s.family = DesignFamily::tmd;
    else if (family == "cubic_nes") s.family = DesignFamily::cubic_nes;
    else if (family == "piecewise") s.family = DesignFamily::piecewise;
    else
        throw ConfigError(
            "config: optimize.family must be tmd, cubic_nes or piecewise");

    if (j.contains("objective")) {
        const json& o = j.at("objective");
        check_keys(o, "optimize.objective", {"quantity", "frame", "order"});
        if (o.contains("quantity"))
            s.objective.quantity = parse_quantity(
                system, text(o, "optimize.objective", "quantity"),
                "optimize.objective");
        if (o.contains("frame")) {
            const std::string f = text(o, "optimize.objective", "frame");
            if (f == "relative") s.objective.frame = Frame::relative;
            else if (f == "absolute") s.objective.frame = Frame::absolute;
            else
                throw ConfigError("config: optimize.objective.frame must be "
                                  "relative or absolute");
        }
        s.objective.order = static_cast<unsigned>(
            count_or(o, "optimize.objective", "order", s.objective.order));
        if (s.objective.order == 0)
            throw ConfigError("config: optimize.objective.order must be >= 1");
    }

    if (j.contains("lambda"))
        s.grid.lambda = parse_axis(j.at("lambda"), "optimize.lambda", s.grid.lambda);
    if (j.contains("coupling"))
        s.grid.coupling =
            parse_axis(j.at("coupling"), "optimize.coupling", s.grid.coupling);
    if (j.contains("alpha_pos"))
        s.piecewise.alpha_pos =
            parse_axis(j.at("alpha_pos"), "optimize.alpha_pos", s.piecewise.alpha_pos);
    if (j.contains("alpha_neg"))
        s.piecewise.alpha_neg =
            parse_axis(j.at("alpha_neg"), "optimize.alpha_neg", s.piecewise.alpha_neg);
    s.grid.refine = flag_or(j, "optimize", "refine", s.grid.refine);
    const std::size_t nodes =
        count_or(j, "optimize", "eta_nodes", s.grid.rare.eta_nodes);
    s.grid.rare.eta_nodes = nodes;
    s.piecewise.rare.eta_nodes = nodes;
    s.overlays = flag_or(j, "optimize", "overlays", s.overlays);
    return s;
}

// ------------------------------------------------------------------ files

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot open for writing: " + path.string());
    out << content;
    if (!out)
        throw ConfigError("write failed: " + path.string());
}

// Registered schemas; writing with an unknown header is a programming error.
void write_csv(const fs::path& path, const char* header,
               const std::string& body) {
    for (const char* known :
         {kPdfHeader, kMcHeader, kValidateHeader, kSurfaceHeader})
        if (header == std::string(known)) {
            write_text_file(path, std::string(header) + "\n" + body);
            return;
        }
    throw ConfigError("unregistered CSV schema: " + std::string(header));
}

std::string pdf_csv(const ResponsePdf& p) {
    std::string body;
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        body += format_csv_value(p.grid[i]);
        body += ',';
        body += format_csv_value(p.density[i]);
        body += ',';
        body += format_csv_value(std::log10(p.density[i]));
        body += ',';
        body += format_csv_value(p.background_component[i]);
        body += ',';
        body += format_csv_value(p.rare_component[i]);
        body += '\n';
    }
    return body;
}

std::string mc_csv(const McHistogram& h) {
    const Density d = h.density();
    std::string body;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        body += format_csv_value(d.center(i));
        body += ',';
        body += std::to_string(h.counts[i]);
        body += ',';
        body += format_csv_value(d.values[i]);
        body += '\n';
    }
    return body;
}

struct Stopwatch {
    std::chrono::steady_clock::time_point mark =
        std::chrono::steady_clock::now();

    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - mark).count();
        mark = now;
        return s;
    }
};

json base_manifest(const RunConfig& config, const char* command) {
    json m;
    m["tool_version"] = kToolVersion;
    m["csv_schema_version"] = kCsvSchemaVersion;
    m["command"] = command;
    m["seed"] = config.seed;
    m["config"] = json::parse(echo_config(config));
    return m;
}

void finish_manifest(json& m, const fs::path& dir,
                     const std::map<std::string, double>& timings,
                     std::vector<std::string> files) {
    m["timings_seconds"] = timings;
    files.push_back("manifest.json");
    m["files"] = files;
    write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

std::string file_label(const RunConfig& config, Quantity q, Frame frame) {
    return quantity_label(config.system.topology, q) +
           (frame == Frame::absolute ? "_abs" : "");
}

ResponsePdf single_pdf(const SystemModel& model, const ForcingModel& forcing,
                       Quantity q, Frame frame, const RunConfig& config) {
    const auto lin = solve_fixed_point(model, forcing.spectrum, config.statlin);
    const auto eta = eta_from(forcing, lin);
    RareOptions r = config.rare;
    r.quantities = {q};
    const auto rare = rare_pdf_simulated(model, forcing, eta, r);
    return synthesize(lin, rare.of(q), q, frame, config.synthesis);
}

} // namespace

// ----------------------------------------------------------------- config

std::vector<Quantity> RunConfig::resolved_quantities() const {
    return quantities.empty() ? all_quantities(system) : quantities;
}

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }

    try {
        check_keys(j, "top level",
                   {"system", "forcing", "method", "quantities", "solver",
                    "optimize", "output_dir", "seed"});
        RunConfig c;
        c.system = parse_system(field(j, "top level", "system"));
        c.forcing = parse_forcing(field(j, "top level", "forcing"));

        if (j.contains("method")) {
            const std::string m = text(j, "top level", "method");
            if (m == "pds") c.method = Method::pds;
            else if (m == "pds-effective") c.method = Method::pds_effective;
            else if (m == "mc") c.method = Method::mc;
            else if (m == "all") c.method = Method::all;
            else
                throw ConfigError(
                    "config: method must be pds, pds-effective, mc or all");
        }

        if (j.contains("quantities")) {
            const json& qs = j.at("quantities");
            if (!qs.is_array())
                throw ConfigError("config: quantities must be an array");
            for (const json& v : qs) {
                if (!v.is_string())
                    throw ConfigError("config: quantities entries must be strings");
                const Quantity q =
                    parse_quantity(c.system, v.get<std::string>(), "quantities");
                for (Quantity seen : c.quantities)
                    if (seen == q)
                        throw ConfigError("config: duplicate quantity '" +
                                          v.get<std::string>() + "'");
                c.quantities.push_back(q);
            }
        }

        if (j.contains("solver")) parse_solver(j.at("solver"), c);
        if (j.contains("optimize"))
            c.optimize = parse_optimize(j.at("optimize"), c.system);
        if (j.contains("output_dir"))
            c.output_dir = text(j, "top level", "output_dir");
        if (j.contains("seed")) {
            const json& s = j.at("seed");
            if (!s.is_number_unsigned())
                throw ConfigError("config: seed must be a non-negative integer");
            c.seed = s.get<std::uint64_t>();
        }

        c.rare.validate();
        if (c.method == Method::pds_effective)
            for (Quantity q : c.resolved_quantities())
                if (q.dof != 0)
                    throw ConfigError(
                        "config: method pds-effective covers only the primary "
                        "DOF, got '" +
                        quantity_label(c.system.topology, q) + "'");
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string echo_config(const RunConfig& c) {
    json j;
    json& sys = j["system"];
    switch (c.system.topology) {
        case Topology::sdof: sys["topology"] = "sdof"; break;
        case Topology::seat2dof: sys["topology"] = "seat2dof"; break;
        case Topology::deckseat3dof: sys["topology"] = "deckseat3dof"; break;
    }
    sys["m_s"] = c.system.m_s;
    sys["lambda_s"] = c.system.lambda_s;
    sys["k_s"] = c.system.k_s;
    sys["m_a"] = c.system.m_a;
    sys["lambda_a"] = c.system.lambda_a;
    sys["m_h"] = c.system.m_h;
    sys["lambda_h"] = c.system.lambda_h;
    sys["k_h"] = c.system.k_h;
    json& spring = sys["spring"];
    switch (c.system.spring.kind) {
        case SpringLaw::Kind::linear:
            spring["kind"] = "linear";
            spring["k"] = c.system.spring.k;
            break;
        case SpringLaw::Kind::cubic:
            spring["kind"] = "cubic";
            spring["k"] = c.system.spring.k;
            spring["c"] = c.system.spring.c;
            break;
        case SpringLaw::Kind::piecewise:
            spring["kind"] = "piecewise";
            spring["k"] = c.system.spring.k;
            spring["alpha_pos"] = c.system.spring.alpha_pos;
            spring["alpha_neg"] = c.system.spring.alpha_neg;
            spring["knee"] = c.system.spring.knee;
            break;
    }

    json& forcing = j["forcing"];
    forcing["q"] = c.forcing.spectrum.q;
    forcing["shift"] = c.forcing.spectrum.shift;
    forcing["T_alpha"] = c.forcing.T_alpha;
    forcing["mu_alpha"] = c.forcing.mu_alpha;
    forcing["sigma_alpha"] = c.forcing.sigma_alpha;
    forcing["pattern"] = c.forcing.pattern == ImpulsePattern::primary_only
                             ? "primary_only"
                             : "all_dofs";

    switch (c.method) {
        case Method::pds: j["method"] = "pds"; break;
        case Method::pds_effective: j["method"] = "pds-effective"; break;
        case Method::mc: j["method"] = "mc"; break;
        case Method::all: j["method"] = "all"; break;
    }

    json labels = json::array();
    for (Quantity q : c.quantities)
        labels.push_back(quantity_label(c.system.topology, q));
    j["quantities"] = labels;

    json& solver = j["solver"];
    solver["statlin_damping"] = c.statlin.damping;
    solver["statlin_tol"] = c.statlin.tol;
    solver["statlin_max_iter"] = c.statlin.max_iter;
    solver["eta_nodes"] = c.rare.eta_nodes;
    solver["eta_span"] = c.rare.eta_span;
    solver["rho_c"] = c.rare.rho_c;
    solver["rare_dt_out"] = c.rare.dt_out;
    solver["rare_rtol"] = c.rare.rtol;
    solver["bins_per_impulse"] = c.rare.bins_per_impulse;
    solver["mixture_bins"] = c.rare.mixture_bins;
    solver["horizon_periods"] = c.rare.horizon_periods;
    solver["energy_cutoff"] = c.rare.energy_cutoff;
    solver["grid_points"] = c.synthesis.grid_points;
    solver["background_span"] = c.synthesis.background_span;
    solver["rare_margin"] = c.synthesis.rare_margin;
    solver["mc_realizations"] = c.mc.realizations;
    solver["mc_impulses"] = c.mc.impulses_each;
    solver["mc_dt"] = c.mc.dt;
    solver["mc_frequency_bins"] = c.mc.frequency_bins;
    solver["mc_min_duration"] = c.mc.min_duration;
    solver["mc_provisional_bins"] = c.mc.provisional_bins;
    solver["mc_dt_out"] = c.mc.sim.dt_out;
    solver["mc_rtol"] = c.mc.sim.rtol;

    if (c.optimize) {
        const OptimizeSection& s = *c.optimize;
        json& o = j["optimize"];
        o["family"] = s.family == DesignFamily::tmd         ? "tmd"
                      : s.family == DesignFamily::cubic_nes ? "cubic_nes"
                                                            : "piecewise";
        json& obj = o["objective"];
        obj["quantity"] =
            quantity_label(c.system.topology, s.objective.quantity);
        obj["frame"] =
            s.objective.frame == Frame::relative ? "relative" : "absolute";
        obj["order"] = s.objective.order;
        auto axis = [](const AxisSpec& a) {
            json x;
            x["min"] = a.min;
            x["max"] = a.max;
            x["count"] = a.count;
            x["log"] = a.log_spaced;
            return x;
        };
        o["lambda"] = axis(s.grid.lambda);
        o["coupling"] = axis(s.grid.coupling);
        o["alpha_pos"] = axis(s.piecewise.alpha_pos);
        o["alpha_neg"] = axis(s.piecewise.alpha_neg);
        o["refine"] = s.grid.refine;
        o["eta_nodes"] = s.grid.rare.eta_nodes;
        o["overlays"] = s.overlays;
    }

    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    return j.dump(2) + "\n";
}

std::string format_csv_value(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

// ------------------------------------------------------------- comparison

PdfComparison compare_histogram(const McHistogram& mc, const ResponsePdf& pds,
                                std::uint64_t min_count,
                                std::size_t target_bins) {
    const McHistogram coarse = mc.rebinned(target_bins);
    const Density d = coarse.density();
    PdfComparison out;
    double sum = 0.0;
    for (std::size_t i = 0; i < coarse.counts.size(); ++i) {
        PdfComparison::Row row;
        row.value = d.center(i);
        row.mc_count = coarse.counts[i];
        row.mc_density = d.values[i];
        row.pds_density = pds(row.value);
        row.masked = row.mc_count >= min_count;
        row.log10_diff =
            std::abs(std::log10(row.mc_density) - std::log10(row.pds_density));
        if (row.masked) {
            out.max_diff = std::max(out.max_diff, row.log10_diff);
            sum += row.log10_diff;
            ++out.used;
        }
        out.rows.push_back(row);
    }
    if (out.used) out.mean_diff = sum / static_cast<double>(out.used);
    return out;
}

// --------------------------------------------------------------- commands

int cmd_estimate(const RunConfig& config, const std::string& out_dir) {
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    json manifest = base_manifest(config, "estimate");
    std::map<std::string, double> timings;
    std::vector<std::string> files;
    Stopwatch watch, total;
    const auto quantities = config.resolved_quantities();

    if (config.method == Method::mc) {
        const McEnsemble mc =
            ensemble_pdf(config.system, config.forcing, config.seed, config.mc);
        timings["monte_carlo"] = watch.lap();
        json variances;
        for (std::size_t i = 0; i < mc.quantities.size(); ++i) {
            const Quantity q = mc.quantities[i];
            bool wanted = false;
            for (Quantity want : quantities) wanted |= want == q;
            if (!wanted) continue;
            for (Frame frame : {Frame::relative, Frame::absolute}) {
                const McHistogram& h =
                    frame == Frame::relative ? mc.relative[i] : mc.absolute[i];
                const std::string name =
                    "mc_" + file_label(config, q, frame) + ".csv";
                write_csv(dir / name, kMcHeader, mc_csv(h.rebinned(512)));
                files.push_back(name);
            }
            const std::string label =
                quantity_label(config.system.topology, q);
            variances[label]["relative"] = mc.variance_rel[i];
            variances[label]["absolute"] = mc.variance_abs[i];
        }
        manifest["derived"]["variance"] = variances;
        manifest["derived"]["trim"] = mc.trim;
        manifest["derived"]["duration"] = mc.duration;
        timings["total"] = total.lap();
        finish_manifest(manifest, dir, timings, files);
        return 0;
    }

    const auto lin =
        solve_fixed_point(config.system, config.forcing.spectrum, config.statlin);
    const auto eta = eta_from(config.forcing, lin);
    timings["statlin"] = watch.lap();

    json derived;
    derived["sigma_h"] = std::sqrt(lin.base.sigma2_h);
    derived["sigma_hdot"] = std::sqrt(lin.base.sigma2_hdot);
    derived["sigma_eta"] = eta.stddev();
    derived["mu_eta"] = eta.mean;
    derived["kappa"] = lin.kappa;
    derived["statlin_iterations"] = lin.iterations;

    const bool simulated = config.method != Method::pds_effective;
    RareSet rare;
    if (simulated) {
        RareOptions r = config.rare;
        r.quantities = quantities;
        rare = rare_pdf_simulated(config.system, config.forcing, eta, r);
    }
    timings["rare"] = watch.lap();

    for (Quantity q : quantities) {
        const RareEventProfile profile =
            simulated ? rare.of(q)
                      : rare_pdf_effective(config.system, config.forcing, eta,
                                           q, config.rare);
        const std::string label = quantity_label(config.system.topology, q);
        derived["p_r"][label] = profile.p_r;
        derived["tau_e"][label] = profile.tau_e;
        for (Frame frame : {Frame::relative, Frame::absolute}) {
            const ResponsePdf pdf =
                synthesize(lin, profile, q, frame, config.synthesis);
            const std::string name =
                "pdf_" + file_label(config, q, frame) + ".csv";
            write_csv(dir / name, kPdfHeader, pdf_csv(pdf));
            files.push_back(name);
        }
    }
    timings["synthesis"] = watch.lap();
    timings["total"] = total.lap();
    manifest["derived"] = derived;
    finish_manifest(manifest, dir, timings, files);
    return 0;
}

int cmd_validate(const RunConfig& config, const std::string& out_dir) {
    if (config.method != Method::all)
        throw ConfigError("validate: config method must be 'all'");
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    json manifest = base_manifest(config, "validate");
    std::map<std::string, double> timings;
    std::vector<std::string> files;
    Stopwatch watch, total;
    const auto quantities = config.resolved_quantities();

    const auto lin =
        solve_fixed_point(config.system, config.forcing.spectrum, config.statlin);
    const auto eta = eta_from(config.forcing, lin);
    RareOptions r = config.rare;
    r.quantities = quantities;
    const RareSet rare =
        rare_pdf_simulated(config.system, config.forcing, eta, r);
    timings["pds"] = watch.lap();

    const McEnsemble mc =
        ensemble_pdf(config.system, config.forcing, config.seed, config.mc);
    timings["monte_carlo"] = watch.lap();

    json report = json::array();
    double overall_max = 0.0;
    for (Quantity q : quantities) {
        const std::string label = quantity_label(config.system.topology, q);
        for (Frame frame : {Frame::relative, Frame::absolute}) {
            const ResponsePdf pdf =
                synthesize(lin, rare.of(q), q, frame, config.synthesis);
            const McHistogram& h =
                frame == Frame::relative ? mc.rel_of(q) : mc.abs_of(q);
            const PdfComparison comp = compare_histogram(h, pdf);

            std::string body;
            for (const PdfComparison::Row& row : comp.rows) {
                body += format_csv_value(row.value);
                body += ',';
                body += std::to_string(row.mc_count);
                body += ',';
                body += format_csv_value(row.mc_density);
                body += ',';
                body += format_csv_value(row.pds_density);
                body += ',';
                body += format_csv_value(row.log10_diff);
                body += ',';
                body += row.masked ? '1' : '0';
                body += '\n';
            }
            const std::string name =
                "validate_" + file_label(config, q, frame) + ".csv";
            write_csv(dir / name, kValidateHeader, body);
            files.push_back(name);

            json entry;
            entry["quantity"] = label;
            entry["frame"] = frame == Frame::relative ? "relative" : "absolute";
            entry["max_log10_diff"] = comp.max_diff;
            entry["mean_log10_diff"] = comp.mean_diff;
            entry["bins_used"] = comp.used;
            report.push_back(entry);
            overall_max = std::max(overall_max, comp.max_diff);
        }
    }
    timings["comparison"] = watch.lap();
    timings["total"] = total.lap();

    write_text_file(dir / "report.json", report.dump(2) + "\n");
    files.push_back("report.json");
    manifest["derived"]["overall_max_log10_diff"] = overall_max;
    manifest["derived"]["report"] = report;
    finish_manifest(manifest, dir, timings, files);
    return 0;
}

int cmd_optimize(const RunConfig& config, const std::string& out_dir) {
    if (!config.optimize)
        throw ConfigError("optimize: config has no optimize section");
    const OptimizeSection& section = *config.optimize;
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    json manifest = base_manifest(config, "optimize");
    std::map<std::string, double> timings;
    std::vector<std::string> files;
    Stopwatch watch, total;

    OptimizationResult res;
    SystemModel reference;  // gamma denominator design, for the overlay
    SystemModel optimal = config.system;
    if (section.family == DesignFamily::piecewise) {
        res = design_piecewise(config.system, config.forcing, section.objective,
                               section.piecewise);
        reference = config.system;
        const auto lin = solve_fixed_point(config.system,
                                           config.forcing.spectrum,
                                           config.statlin);
        optimal.spring =
            SpringLaw::piecewise(config.system.spring.k, res.best1(),
                                 res.best2(), 4.0 * lin.sigma_zeta);
    } else {
        const AttachmentFamily family = section.family == DesignFamily::tmd
                                            ? AttachmentFamily::tmd
                                            : AttachmentFamily::cubic_nes;
        res = grid_search(config.system, config.forcing, family,
                          section.objective, section.grid);
        reference = baseline_model(config.system);
        optimal.lambda_a = res.best1();
        optimal.spring = family == AttachmentFamily::tmd
                             ? SpringLaw::linear(res.best2())
                             : SpringLaw::cubic(0.0, res.best2());
    }
    timings["scan"] = watch.lap();

    std::string body;
    for (std::size_t i = 0; i < res.axis1.size(); ++i)
        for (std::size_t k = 0; k < res.axis2.size(); ++k) {
            body += format_csv_value(res.axis1[i]);
            body += ',';
            body += format_csv_value(res.axis2[k]);
            body += ',';
            body += format_csv_value(res.at(i, k));
            body += ',';
            body += format_csv_value(res.at(i, k) / res.baseline);
            body += '\n';
        }
    write_csv(dir / "surface.csv", kSurfaceHeader, body);
    files.push_back("surface.csv");

    json& derived = manifest["derived"];
    derived["param1"] = res.best1();
    derived["param2"] = res.best2();
    derived["best_objective"] = res.best_objective;
    derived["baseline"] = res.baseline;
    derived["gamma"] = res.gamma;

    if (section.overlays) {
        const Quantity q = section.objective.quantity;
        const Frame frame = section.objective.frame;
        const auto overlay = [&](const char* name, const SystemModel& model) {
            const ResponsePdf pdf =
                single_pdf(model, config.forcing, q, frame, config);
            const std::string file = std::string(name) + ".csv";
            write_csv(dir / file, kPdfHeader, pdf_csv(pdf));
            files.push_back(file);
        };
        overlay("overlay_baseline", reference);
        overlay("overlay_optimal", optimal);
        timings["overlays"] = watch.lap();
    }
    timings["total"] = total.lap();
    finish_manifest(manifest, dir, timings, files);
    return 0;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const PrOutOfRange*>(&e) ||
        dynamic_cast<const NoDecay*>(&e) ||
        dynamic_cast<const NotOscillatory*>(&e))
        return 4;
    return 3;
}

} // namespace pds
