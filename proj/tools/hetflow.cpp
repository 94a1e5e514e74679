// hetflow command-line front end. Exit codes: 0 success, 1 config error,
// 2 numerical-domain error, 3 verification failure.
#include "hetflow/chart.hpp"
#include "hetflow/het_flow.hpp"
#include "hetflow/homothety.hpp"
#include "hetflow/soliton.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

using namespace hetflow;
using json = nlohmann::ordered_json;

namespace {

constexpr int kCsvSchemaVersion = 1;
constexpr int kExitConfig = 1, kExitDomain = 2, kExitVerify = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// shortest round-trip representation, independent of the locale
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

// ---- options -----------------------------------------------------------------

struct Options {
    std::string config, output = "-";
    std::uint64_t seed = 0;
    double kappa = 1.0, mu = 0.0, sigma0 = 1.0, t0 = 0.0, t1 = 10.0, stride = 0.0;
    double rtol = 1e-10, atol = 1e-12, tol = kConstructorTol, h_coefficient = kAdoptedHCoefficient;
    std::optional<double> f, algebra_param;
    std::string hcase = "positive", model = "printed", algebra = "heisenberg", soliton, suite = "all";
    std::vector<double> metric;
    double kappa_min = 0.0, kappa_max = 1.0, mu_min = 0.0, mu_max = 2.0;
    int n_kappa = 41, n_mu = 41, trials = 100;
    bool cross_check = false;
};

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "JSON file with option values; flags override it");
    sub->add_option("-o,--output", o.output, "output path, - for stdout");
}

void add_ode(CLI::App* sub, Options& o) {
    sub->add_option("--rtol", o.rtol, "relative tolerance");
    sub->add_option("--atol", o.atol, "absolute tolerance");
}

// values from the JSON file for options not given on the command line
void apply_config(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "config") throw ConfigError("config files cannot nest");
        CLI::Option* opt = nullptr;
        try {
            opt = sub->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw ConfigError("unknown config key '" + key + "' for " + sub->get_name());
        }
        if (opt->count() > 0) continue;
        auto as_string = [&](const json& v) -> std::string {
            if (v.is_string()) return v.get<std::string>();
            if (v.is_number() || v.is_boolean()) return v.dump();
            throw ConfigError("config key '" + key + "' has an unsupported value");
        };
        if (value.is_array())
            for (const auto& v : value) opt->add_result(as_string(v));
        else
            opt->add_result(as_string(value));
        try {
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
}

void require_finite(std::initializer_list<std::pair<const char*, double>> values) {
    for (const auto& [name, v] : values)
        if (!std::isfinite(v)) throw ConfigError(std::string(name) + " must be finite");
}

int thread_count() {
    const char* env = std::getenv("HETFLOW_THREADS");
    if (!env || !*env) return std::max(1u, std::thread::hardware_concurrency());
    int n = 0;
    const auto res = std::from_chars(env, env + std::strlen(env), n);
    if (res.ec != std::errc() || *res.ptr != '\0' || n < 1) throw ConfigError("HETFLOW_THREADS must be a positive integer");
    return n;
}

Mat parse_metric(const std::vector<double>& v) {
    Mat g(3, 3);
    if (v.empty()) return Mat::Identity(3, 3);
    if (v.size() == 6) {
        int k = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) g(i, j) = g(j, i) = v[k++];
    } else if (v.size() == 9) {
        for (int k = 0; k < 9; ++k) g(k / 3, k % 3) = v[k];
    } else {
        throw ConfigError("--metric takes 6 (upper triangle) or 9 entries");
    }
    if (!g.allFinite()) throw ConfigError("metric entries must be finite");
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff()))
        throw ConfigError("metric must be symmetric");
    return g;
}

LieAlgebraData parse_algebra(const Options& o) {
    try {
        return catalog(o.algebra, o.algebra_param);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

// ---- verbs -------------------------------------------------------------------

std::string cmd_homothety(const Options& o, int& code) {
    require_finite({{"kappa", o.kappa}, {"mu", o.mu}, {"sigma0", o.sigma0}, {"t0", o.t0}, {"t1", o.t1}});
    if (o.stride < 0.0 || !std::isfinite(o.stride)) throw ConfigError("stride must be >= 0");
    if (o.model != "printed" && o.model != "exact") throw ConfigError("model must be printed or exact");
    const bool su2 = o.hcase == "su2";
    LaurentRhs F;
    HomothetyCase hc = HomothetyCase::Flat;
    if (su2) {
        if (!(o.kappa > 0.0)) throw ConfigError("su2 mode needs kappa > 0");
        if (o.sigma0 <= 0.0) throw ConfigError("sigma0 must be > 0");
        F = su2_rhs(o.kappa);
    } else {
        try {
            hc = parse_homothety_case(o.hcase);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        HomothetyProblem p = make_problem(hc, o.kappa, o.mu, o.sigma0);
        p.model = o.model == "exact" ? HomothetyModel::Exact : HomothetyModel::Printed;
        try {
            p.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        F = p.rhs();
    }
    OdeOptions opt;
    opt.rtol = o.rtol;
    opt.atol = o.atol;
    const double stride = o.stride > 0.0 ? o.stride : std::abs(o.t1 - o.t0) / 200.0;
    const HomothetyTrajectory tr = integrate(F, o.sigma0, o.t0, o.t1, opt, HomothetyEvents{}, stride);
    if (tr.status == OdeStatus::NonFinite) throw std::domain_error("homothety trajectory became non-finite");

    // closed forms start from σ = 1 at t = 0
    const bool closed = o.sigma0 == 1.0 && o.t0 == 0.0 && (su2 || hc == HomothetyCase::Flat);
    auto closed_value = [&](double t) -> std::string {
        try {
            return num(su2 ? su2_closed_form(o.kappa, t) : flat_closed_form(o.kappa, o.mu, t));
        } catch (const std::domain_error&) {
            return "";
        }
    };
    const Behavior b = classify(F, o.sigma0);
    std::ostringstream out;
    out << "# schema_version=" << kCsvSchemaVersion << " verb=homothety case=" << o.hcase << " model=" << o.model
        << " kappa=" << num(o.kappa) << " mu=" << num(su2 ? 0.0 : o.mu) << " behavior=" << to_string(b.tag)
        << " status=" << to_string(tr.status) << "\n";
    out << "t,sigma,f" << (closed ? ",sigma_closed" : "") << ",event\n";
    const double mu = su2 ? 0.0 : o.mu;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        const bool last = i + 1 == tr.t.size();
        // the collapse event sits on σ = 0 up to the event tolerance
        const double s = last && tr.event == "collapse" ? 0.0 : tr.sigma[i];
        out << num(tr.t[i]) << "," << num(s) << "," << (s > 0.0 ? num(mu * std::pow(s, -1.5)) : "");
        if (closed) out << "," << closed_value(tr.t[i]);
        out << "," << (last ? tr.event : "") << "\n";
    }
    code = 0;
    return out.str();
}

std::string cmd_sweep(const Options& o, int& code) {
    HomothetyCase hc;
    try {
        hc = parse_homothety_case(o.hcase);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    SweepGrid grid{o.kappa_min, o.kappa_max, o.mu_min, o.mu_max, o.n_kappa, o.n_mu};
    try {
        grid.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const std::vector<SweepCell> cells = sweep(hc, grid, thread_count(), o.cross_check);
    std::ostringstream out;
    out << "# schema_version=" << kCsvSchemaVersion << " verb=sweep case=" << o.hcase << "\n";
    out << "kappa,mu,tag,sigma_minus_inf,sigma_plus_inf,collapse_time" << (o.cross_check ? ",integrated_tag" : "")
        << "\n";
    int disagree = 0;
    for (const SweepCell& c : cells) {
        out << num(c.kappa) << "," << num(c.mu) << "," << to_string(c.behavior.tag) << ","
            << opt_num(c.behavior.sigma_minus_inf) << "," << opt_num(c.behavior.sigma_plus_inf) << ","
            << opt_num(c.behavior.collapse_time);
        if (o.cross_check) {
            out << "," << to_string(*c.integrated);
            if (!tags_agree(c.behavior.tag, *c.integrated)) ++disagree;
        }
        out << "\n";
    }
    if (disagree > 0) std::cerr << "sweep: " << disagree << " cells disagree with integration\n";
    code = disagree > 0 ? kExitVerify : 0;
    return out.str();
}

std::string cmd_flow(const Options& o, int& code) {
    require_finite({{"kappa", o.kappa}, {"t1", o.t1}, {"h-coefficient", o.h_coefficient}});
    if (o.kappa < 0.0) throw ConfigError("kappa must be >= 0");
    FlowState3 state;
    if (!o.soliton.empty()) {
        if (!(o.kappa > 0.0)) throw ConfigError("soliton starts need kappa > 0");
        if (o.soliton != "heisenberg" && o.soliton != "hyperbolic")
            throw ConfigError("--soliton must be heisenberg or hyperbolic");
        const InvariantGeometry geom = o.soliton == "heisenberg" ? heisenberg_geometry(o.kappa) : hyperbolic_geometry(o.kappa);
        state = {geom.alg, geom.g.g(), build_sample_invariant(geom).f, 0.0};
    } else {
        state = {parse_algebra(o), parse_metric(o.metric), o.f.value_or(0.0), 0.0};
        if (!std::isfinite(state.f)) throw ConfigError("f must be finite");
    }
    FlowParams p;
    p.kappa = o.kappa;
    p.t1 = o.t1;
    p.sample_dt = o.stride > 0.0 ? o.stride : std::abs(o.t1) / 200.0;
    p.ode.rtol = o.rtol;
    p.ode.atol = o.atol;
    p.h_coefficient = o.h_coefficient;
    const FlowTrajectory tr = integrate_flow(state, p);  // domain_error for a non-SPD metric
    if (tr.status == OdeStatus::NonFinite) throw std::domain_error("flow became non-finite");

    std::ostringstream out;
    out << "# schema_version=" << kCsvSchemaVersion << " verb=flow algebra=" << state.alg.name << " kappa=" << num(o.kappa)
        << " h_coefficient=" << num(o.h_coefficient) << " status=" << to_string(tr.status) << "\n";
    out << "t,g11,g12,g13,g22,g23,g33,f,sigma,event\n";
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        const Mat& g = tr.g[i];
        out << num(tr.t[i]);
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) out << "," << num(g(a, b));
        out << "," << num(tr.f[i]) << "," << num(homothety_factor(g, state.g)) << ","
            << (i + 1 == tr.t.size() ? tr.event : "") << "\n";
    }
    code = 0;
    return out.str();
}

void merge(ResidualReport& into, const ResidualReport& from) {
    for (const auto& e : from.entries()) into.add(e.name, e.value, e.tol);
}

std::string cmd_soliton_check(const Options& o, int& code) {
    require_finite({{"kappa", o.kappa}, {"tol", o.tol}});
    if (!(o.kappa > 0.0)) throw ConfigError("kappa must be > 0");
    const bool constructor = o.metric.empty() && !o.f && !o.algebra_param &&
                             (o.algebra == "heisenberg" || o.algebra == "hyperbolic");
    std::optional<InvariantGeometry> geom;
    if (constructor) {
        geom = o.algebra == "heisenberg" ? heisenberg_geometry(o.kappa) : hyperbolic_geometry(o.kappa);
    } else {
        geom.emplace(parse_algebra(o), Metric(parse_metric(o.metric)));
    }
    const ConstantDilatonClass cls = classify_constant_dilaton(geom->ric, geom->g, o.kappa);
    double f = 0.0;
    if (constructor) f = build_sample_invariant(*geom).f;
    else if (o.f) f = *o.f;
    else if (cls.case_id != 0) f = cls.f;
    if (!std::isfinite(f)) throw ConfigError("f must be finite");
    geom->set_dilaton_density(f);
    const SolitonCandidate c{build_sample_invariant(*geom), o.kappa};

    ResidualReport r;
    merge(r, residual_general(c, o.tol));
    merge(r, residual_3d(c.sample, o.kappa, o.tol));
    merge(r, strong_residual(c, o.tol));
    merge(r, verify_divergence_identities(c.sample, o.kappa, o.seed));
    r.set_info("kappa", o.kappa);
    r.set_info("f", f);
    r.set_info("scalar_curvature", geom->s);
    r.set_info("case", cls.case_id);
    r.set_label("algebra", geom->alg.name);
    r.set_label("source", constructor ? "constructor" : "config");
    code = r.all_pass() ? 0 : kExitVerify;
    return r.to_json() + "\n";
}

struct SuiteCheck {
    double max = 0.0;
    double tol = 0.0;
    int samples = 0;
    int failures = 0;
};

void record(std::map<std::string, SuiteCheck>& checks, const std::string& prefix, const ResidualReport& r) {
    for (const auto& e : r.entries()) {
        SuiteCheck& c = checks[prefix + "." + e.name];
        c.max = std::max(c.max, e.value);
        c.tol = e.tol;
        ++c.samples;
        if (!e.pass) ++c.failures;
    }
}

std::string cmd_verify(const Options& o, int& code) {
    if (o.trials < 1) throw ConfigError("trials must be >= 1");
    const bool all = o.suite == "all";
    if (!all && o.suite != "identities" && o.suite != "divergence" && o.suite != "solitons")
        throw ConfigError("suite must be identities, divergence, solitons or all");
    std::map<std::string, SuiteCheck> checks;
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> uf(-2.0, 2.0), uk(0.1, 10.0);
    if (all || o.suite == "identities") {
        const auto& names = catalog_names();
        for (int k = 0; k < o.trials; ++k) {
            const ChartInputs in = random_chart_inputs(o.seed + k);
            record(checks, "identities.chart", verify_curvature_identities_3d(build_sample_poly(in.metric, in.f, in.potential, 1)));
            InvariantGeometry geom(catalog(names[k % names.size()]), Metric(random_spd(rng, 3)));
            geom.set_dilaton_density(uf(rng));
            record(checks, "identities.invariant", verify_curvature_identities_3d(build_sample_invariant(geom)));
        }
    }
    if (all || o.suite == "divergence") {
        for (int k = 0; k < o.trials; ++k) {
            const ChartInputs in = random_chart_inputs(o.seed + k);
            const GeometrySample s = build_sample_poly(in.metric, in.f, in.potential, 2);
            record(checks, "divergence", verify_divergence_identities(s, uk(rng) / 5.0, o.seed + k));
        }
    }
    if (all || o.suite == "solitons") {
        for (int k = 0; k < o.trials; ++k) {
            const double kappa = uk(rng);
            for (const SolitonCandidate& c : {heisenberg_strong_soliton(kappa), hyperbolic_soliton(kappa)}) {
                ResidualReport r;
                merge(r, residual_general(c));
                merge(r, residual_3d(c.sample, kappa));
                merge(r, strong_residual(c));
                record(checks, "solitons", r);
            }
        }
    }
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["suite"] = o.suite;
    j["trials"] = o.trials;
    j["seed"] = o.seed;
    bool pass = true;
    json jc = json::object();
    for (const auto& [name, c] : checks) {
        jc[name] = {{"max", c.max}, {"tol", c.tol}, {"samples", c.samples}, {"failures", c.failures}};
        pass = pass && c.failures == 0;
    }
    j["pass"] = pass;
    j["checks"] = jc;
    code = pass ? 0 : kExitVerify;
    return j.dump(2) + "\n";
}

// ---- output ------------------------------------------------------------------

void write_atomic(const std::string& path, const std::string& data) {
    if (path == "-" || path.empty()) {
        std::cout << data << std::flush;
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
        out << data;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw ConfigError("write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ConfigError("cannot rename output into place: " + path);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hetflow: heterotic flow laboratory"};
    app.require_subcommand(1);
    Options o;

    auto* hom = app.add_subcommand("homothety", "integrate a homothety flow, CSV t,sigma,f");
    add_common(hom, o);
    add_ode(hom, o);
    hom->add_option("--case", o.hcase, "positive, flat, negative or su2");
    hom->add_option("--kappa", o.kappa, "string coupling");
    hom->add_option("--mu", o.mu, "dilaton parameter");
    hom->add_option("--sigma0", o.sigma0, "initial scale");
    hom->add_option("--t0", o.t0, "start time");
    hom->add_option("--t1", o.t1, "end time");
    hom->add_option("--stride", o.stride, "output spacing (default (t1-t0)/200)");
    hom->add_option("--model", o.model, "printed or exact reduction");

    auto* swp = app.add_subcommand("sweep", "classify homothety behavior over a (kappa, mu) grid");
    add_common(swp, o);
    swp->add_option("--case", o.hcase, "positive, flat or negative");
    swp->add_option("--kappa-min", o.kappa_min, "lower kappa");
    swp->add_option("--kappa-max", o.kappa_max, "upper kappa");
    swp->add_option("--n-kappa", o.n_kappa, "kappa nodes");
    swp->add_option("--mu-min", o.mu_min, "lower mu");
    swp->add_option("--mu-max", o.mu_max, "upper mu");
    swp->add_option("--n-mu", o.n_mu, "mu nodes");
    swp->add_flag("--cross-check", o.cross_check, "also classify by integration");

    auto* flw = app.add_subcommand("flow", "integrate the 3D flow on a left-invariant metric");
    add_common(flw, o);
    add_ode(flw, o);
    flw->add_option("--algebra", o.algebra, "r3, heisenberg, su2, sl2r, e11, e2 or hyperbolic");
    flw->add_option("--algebra-param", o.algebra_param, "catalog parameter");
    flw->add_option("--metric", o.metric, "6 upper-triangle or 9 entries")->delimiter(',');
    flw->add_option("--f", o.f, "dilaton density");
    flw->add_option("--kappa", o.kappa, "string coupling");
    flw->add_option("--t1", o.t1, "end time");
    flw->add_option("--stride", o.stride, "output spacing (default t1/200)");
    flw->add_option("--h-coefficient", o.h_coefficient, "coefficient of H∘H (1 adopted, 0.5 alternative)");
    flw->add_option("--soliton", o.soliton, "start at the heisenberg or hyperbolic soliton");

    auto* sol = app.add_subcommand("soliton-check", "residual report of a left-invariant candidate, JSON");
    add_common(sol, o);
    sol->add_option("--algebra", o.algebra, "catalog algebra");
    sol->add_option("--algebra-param", o.algebra_param, "catalog parameter");
    sol->add_option("--metric", o.metric, "6 upper-triangle or 9 entries")->delimiter(',');
    sol->add_option("--f", o.f, "dilaton density (default from the classification)");
    sol->add_option("--kappa", o.kappa, "string coupling");
    sol->add_option("--tol", o.tol, "residual tolerance");
    sol->add_option("--seed", o.seed, "probe seed of the divergence identities");

    auto* ver = app.add_subcommand("verify", "run a verification suite, JSON summary");
    add_common(ver, o);
    ver->add_option("--suite", o.suite, "identities, divergence, solitons or all");
    ver->add_option("--trials", o.trials, "random samples per check");
    ver->add_option("--seed", o.seed, "first sample seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!o.config.empty()) apply_config(sub, o.config);
        int code = 0;
        std::string data;
        const std::string name = sub->get_name();
        if (name == "homothety") data = cmd_homothety(o, code);
        else if (name == "sweep") data = cmd_sweep(o, code);
        else if (name == "flow") data = cmd_flow(o, code);
        else if (name == "soliton-check") data = cmd_soliton_check(o, code);
        else data = cmd_verify(o, code);
        write_atomic(o.output, data);
        return code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical domain error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    }
}
