#include "lavlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lavlab/errors.hpp"
#include "lavlab/injectivity.hpp"
#include "lavlab/minimize.hpp"
#include "lavlab/rng.hpp"
#include "lavlab/scaling.hpp"
#include "lavlab/svg.hpp"

namespace lavlab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Staged output: files accumulate in memory and hit disk only when every
// artifact of the command succeeded, so failures leave no partial outputs.
class OutputSet {
public:
    explicit OutputSet(std::string dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, std::string content) { staged_.emplace_back(name, std::move(content)); }

    void commit() {
        fs::create_directories(dir_);
        for (const auto& [name, content] : staged_) {
            const fs::path final_path = fs::path(dir_) / name;
            const fs::path tmp_path = final_path.string() + ".tmp";
            {
                std::ofstream os(tmp_path, std::ios::binary);
                if (!os) fail(ErrorKind::Io, "cannot write " + tmp_path.string());
                os << content;
            }
            fs::rename(tmp_path, final_path);
        }
    }

private:
    std::string dir_;
    std::vector<std::pair<std::string, std::string>> staged_;
};

struct RunConfig {
    int dim = 2;
    double p = 0.0;  // 0 = dimension default
    double q = 0.0;
    double gamma_override = -1.0;  // verify-only knob, <0 = derive
    std::string family;            // empty = dimension default pinch family
    double alpha = -1.0, beta = -1.0;
    std::vector<double> s_list;
    double s = 0.25;
    std::uint64_t seed = 12345;
    std::string out = "out";
    int gauss_order = 16, grading_levels = 40, refinement_cap = 60;
    double grading_ratio = 0.5;
    double h = 0.0;       // cn raster size, 0 = s/64 (2D) or s/8 (3D)
    double sigma = -10.0; // -10 = default 0.1 s
    int grid_n = 64;
    int res_long = 64, res_narrow = 16;
    int max_iters = 2000;
    int svg_samples = 160;  // boundary polyline density
    int threads = -1;  // -1 = leave LAVLAB_THREADS in charge
    double eta = 0.0;  // 0 = default eta ladder
};

std::vector<double> parse_s_list(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        vals.push_back(std::stod(tok));
    }
    return vals;
}

void apply_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream is(path);
    if (!is) fail(ErrorKind::Io, "cannot read config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto strip = [](std::string v) {
            v.erase(0, v.find_first_not_of(" \t\r"));
            const auto last = v.find_last_not_of(" \t\r");
            v.erase(last == std::string::npos ? 0 : last + 1);
            return v;
        };
        if (strip(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::Io, path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = strip(line.substr(0, eq));
        const std::string val = strip(line.substr(eq + 1));
        try {
            if (key == "dim") cfg.dim = std::stoi(val);
            else if (key == "p") cfg.p = std::stod(val);
            else if (key == "q") cfg.q = std::stod(val);
            else if (key == "gamma") cfg.gamma_override = std::stod(val);
            else if (key == "family") cfg.family = val;
            else if (key == "alpha") cfg.alpha = std::stod(val);
            else if (key == "beta") cfg.beta = std::stod(val);
            else if (key == "s") cfg.s = std::stod(val);
            else if (key == "s_list") cfg.s_list = parse_s_list(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "out") cfg.out = val;
            else if (key == "gauss_order") cfg.gauss_order = std::stoi(val);
            else if (key == "grading_levels") cfg.grading_levels = std::stoi(val);
            else if (key == "grading_ratio") cfg.grading_ratio = std::stod(val);
            else if (key == "refinement_cap") cfg.refinement_cap = std::stoi(val);
            else if (key == "h") cfg.h = std::stod(val);
            else if (key == "sigma") cfg.sigma = std::stod(val);
            else if (key == "grid_n") cfg.grid_n = std::stoi(val);
            else if (key == "res_long") cfg.res_long = std::stoi(val);
            else if (key == "res_narrow") cfg.res_narrow = std::stoi(val);
            else if (key == "max_iters") cfg.max_iters = std::stoi(val);
            else if (key == "svg_samples") cfg.svg_samples = std::stoi(val);
            else if (key == "threads") cfg.threads = std::stoi(val);
            else if (key == "eta") cfg.eta = std::stod(val);
            else fail(ErrorKind::Io, path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            fail(ErrorKind::Io, path + ":" + std::to_string(lineno) + ": bad value for '" + key + "'");
        }
    }
}

struct Resolved {
    MaterialParams mp;
    DeformationFamily family;
    QuadratureSpec spec;
    std::vector<double> s_values;
    double sigma = 0.0;
    double h = 0.0;
};

Resolved resolve(RunConfig& cfg) {
    Resolved r;
    if (cfg.p == 0.0) cfg.p = cfg.dim == 2 ? 3.0 : 3.2;
    if (cfg.q == 0.0) cfg.q = cfg.dim == 2 ? 2.0 : 2.2;
    r.mp = make_material(cfg.dim, cfg.p, cfg.q);
    if (cfg.gamma_override >= 0.0) r.mp.gamma = cfg.gamma_override;

    if (cfg.family.empty()) cfg.family = cfg.dim == 2 ? "cross2d" : "cross3d";
    const FamilyKind kind = parse_family(cfg.family);
    if (cfg.alpha < 0.0 || cfg.beta < 0.0) {
        r.family = default_family(kind, r.mp);
        if (cfg.alpha >= 0.0) r.family = make_family(kind, r.mp, cfg.alpha, r.family.beta);
        if (cfg.beta >= 0.0) r.family = make_family(kind, r.mp, r.family.alpha, cfg.beta);
    } else {
        r.family = make_family(kind, r.mp, cfg.alpha, cfg.beta);
    }

    r.spec.gauss_order = cfg.gauss_order;
    r.spec.grading_levels = cfg.grading_levels;
    r.spec.grading_ratio = cfg.grading_ratio;
    r.spec.refinement_cap = cfg.refinement_cap;

    r.s_values = cfg.s_list;
    if (r.s_values.empty()) r.s_values = dyadic_s_values(4, cfg.dim == 2 ? 10 : 8);
    r.sigma = cfg.sigma <= -10.0 ? 0.1 * cfg.s : cfg.sigma;
    r.h = cfg.h > 0.0 ? cfg.h : (cfg.dim == 2 ? cfg.s / 64.0 : cfg.s / 8.0);
    if (cfg.threads >= 0) par::set_threads(cfg.threads);
    return r;
}

std::string sweep_csv(const std::vector<EnergyReport>& reports) {
    std::string csv = "#schema=sweep/v1\n";
    csv += "s,E_total,E_S1_inner,E_S1_outer,E_S2_inner,E_S2_outer,quad_err\n";
    for (const auto& rep : reports) {
        csv += num(rep.s);
        csv += "," + num(rep.total);
        for (double v : rep.per_region) csv += "," + num(v);
        csv += "," + num(rep.quadrature_error) + "\n";
    }
    return csv;
}

std::string scaling_svg(const std::vector<std::vector<EnergyReport>>& series,
                        const std::vector<std::string>& colors, const std::vector<std::string>& labels) {
    double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
    bool first = true;
    for (const auto& reports : series)
        for (const auto& rep : reports) {
            const double x = std::log2(rep.s), y = std::log2(std::max(rep.total, 1e-300));
            if (first) {
                x_lo = x_hi = x;
                y_lo = y_hi = y;
                first = false;
            }
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    const double mx = 0.08 * (x_hi - x_lo + 1), my = 0.08 * (y_hi - y_lo + 1);
    SvgCanvas canvas(x_lo - mx, x_hi + mx, y_lo - my, y_hi + my);
    canvas.line(x_lo, y_lo, x_hi, y_lo, "#888");
    canvas.line(x_lo, y_lo, x_lo, y_hi, "#888");
    canvas.text(x_lo, y_hi + 0.4 * my, "log2 E_s against log2 s");
    for (std::size_t k = 0; k < series.size(); ++k) {
        std::vector<Vec> pts;
        for (const auto& rep : series[k]) pts.push_back(Vec(std::log2(rep.s), std::log2(std::max(rep.total, 1e-300))));
        std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) { return a[0] < b[0]; });
        canvas.polyline(pts, colors[k]);
        if (!pts.empty()) canvas.text(pts.front()[0], pts.front()[1], labels[k]);
    }
    return canvas.finish();
}

std::string deformed_svg(const DeformationFamily& family, const StripeDomain& dom, int samples) {
    std::vector<Vec> b1 = strip_image_boundary(family, dom, 1, samples);
    std::vector<Vec> b2 = strip_image_boundary(family, dom, 2, samples);
    double x_lo = b1[0][0], x_hi = x_lo, y_lo = b1[0][1], y_hi = y_lo;
    for (const auto& pts : {b1, b2})
        for (const Vec& pt : pts) {
            x_lo = std::min(x_lo, pt[0]);
            x_hi = std::max(x_hi, pt[0]);
            y_lo = std::min(y_lo, pt[1]);
            y_hi = std::max(y_hi, pt[1]);
        }
    const double m = 0.05 * std::max(x_hi - x_lo, y_hi - y_lo) + 0.05;
    SvgCanvas canvas(x_lo - m, x_hi + m, y_lo - m, y_hi + m);
    canvas.polyline(b1, "#1f77b4");
    canvas.polyline(b2, "#d62728");
    return canvas.finish();
}

std::string reference_svg(const StripeDomain& dom) {
    DeformationFamily id;
    id.kind = FamilyKind::BoundaryDatum;
    std::vector<Vec> b1 = strip_image_boundary(id, dom, 1, 8);
    // draw the reference S2 without the shift: map boundary of the S2 box by identity
    Vec lo, hi;
    component_box(dom, 2, lo, hi);
    std::vector<Vec> b2 = {Vec(lo[0], lo[1]), Vec(hi[0], lo[1]), Vec(hi[0], hi[1]), Vec(lo[0], hi[1]),
                           Vec(lo[0], lo[1])};
    SvgCanvas canvas(-1.5, hi[0] + 0.5, -1.5, 1.5);
    canvas.polyline(b1, "#1f77b4");
    canvas.polyline(b2, "#d62728");
    canvas.line(-1.4, 0, hi[0] + 0.4, 0, "#bbb", 0.5);
    canvas.line(0, -1.4, 0, 1.4, "#bbb", 0.5);
    return canvas.finish();
}

// --- verify ----------------------------------------------------------------

struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

void run_verify_checks(const RunConfig& cfg, const Resolved& r, std::vector<CheckOutcome>& checks) {
    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        checks.push_back({name, pass, detail});
    };

    {
        const double expect = derive_gamma(r.mp.d, r.mp.p, r.mp.q);
        const bool ok = std::abs(r.mp.gamma - expect) <= 1e-12 * expect;
        add("gamma_consistency", ok, "gamma=" + num(r.mp.gamma) + " expected=" + num(expect));
    }
    {
        SplitMix64 rng(cfg.seed);
        bool ok = true;
        double worst = 0.0;
        const double wi = energy_at_identity(r.mp);
        for (int k = 0; k < 20000 && ok; ++k) {
            Mat f = random_matrix_with_det(r.mp.d, rng, 0.01, 100.0);
            const double w = energy_density(f, r.mp);
            if (!(w - wi >= -1e-9 * (1.0 + std::abs(w)))) ok = false;
            Mat rot = random_rotation(r.mp.d, rng);
            const double w_left = energy_density(matmul(rot, f), r.mp);
            const double w_right = energy_density(matmul(f, rot), r.mp);
            worst = std::max({worst, std::abs(w_left - w) / w, std::abs(w_right - w) / w});
        }
        add("identity_min_and_isotropy", ok && worst <= 1e-12, "max frame deviation=" + num(worst));
    }
    {
        SplitMix64 rng(cfg.seed + 1);
        double worst = 0.0;
        for (int k = 0; k < 60; ++k) {
            Mat f = random_matrix_with_det(r.mp.d, rng, 0.1, 10.0);
            Mat gradient = energy_gradient(f, r.mp);
            const double fd_h = 1e-5;
            for (int i = 0; i < r.mp.d; ++i)
                for (int j = 0; j < r.mp.d; ++j) {
                    Mat fp = f, fm = f;
                    fp(i, j) += fd_h;
                    fm(i, j) -= fd_h;
                    const double fd = (energy_density(fp, r.mp) - energy_density(fm, r.mp)) / (2 * fd_h);
                    worst = std::max(worst, std::abs(fd - gradient(i, j)) / (1.0 + std::abs(fd)));
                }
        }
        add("gradient_vs_fd", worst <= 1e-6, "max rel dev=" + num(worst));
    }
    {
        LowerBoundConstants consts = lower_bound_constants(r.mp);
        SplitMix64 rng(cfg.seed + 2);
        bool ok = consts.mu >= std::pow(static_cast<double>(r.mp.d), r.mp.q * r.mp.d / 2.0) - 1e-9 &&
                  consts.c_hat > 0.0 && consts.c > 0.0;
        for (int k = 0; k < 20000 && ok; ++k) {
            Mat f = random_matrix_with_det(r.mp.d, rng, 0.01, 100.0);
            if (!check_lower_bound(f, r.mp, consts).holds) ok = false;
        }
        add("lower_bound_constants", ok, "mu=" + num(consts.mu) + " c_hat=" + num(consts.c_hat));
    }
    {
        StripeDomain dom = make_domain(r.mp.d, cfg.s);
        bool ok = true;
        for (const Vec& x : sample_points(dom, 5000, cfg.seed)) {
            const RegionLabel lab = classify(x, dom);
            if (lab == RegionLabel::Outside) ok = false;
            if (lab == RegionLabel::S2Inner || lab == RegionLabel::S2Outer) {
                const RegionLabel pulled = classify(pull_back(x, dom), dom);
                const bool inner = lab == RegionLabel::S2Inner;
                if (pulled != (inner ? RegionLabel::S1Inner : RegionLabel::S1Outer)) ok = false;
            }
        }
        add("geometry_classification", ok, "5000 samples");
    }
    {
        StripeDomain dom = make_domain(r.mp.d, cfg.s);
        double worst = 0.0;
        std::vector<DeformationFamily> fams;
        fams.push_back(default_family(FamilyKind::BoundaryDatum, r.mp));
        if (r.mp.d == 2) {
            fams.push_back(default_family(FamilyKind::CrossPinch2D, r.mp));
            fams.push_back(default_family(FamilyKind::Bypass2D, r.mp));
        } else {
            fams.push_back(default_family(FamilyKind::CrossPinch3D, r.mp));
            fams.push_back(default_family(FamilyKind::Bypass3D, r.mp));
        }
        for (const auto& fam : fams)
            worst = std::max(worst, interface_continuity_residual(fam, dom, 50));
        add("interface_continuity", worst <= 1e-12, "max residual=" + num(worst));
    }
    {
        QuadratureSpec spec = r.spec;
        IntegralResult one = integrate_1d_singular([](double t) { return std::pow(t, -0.9); }, 0.0, 1.0,
                                                   0.0, spec);
        const bool ok1 = std::abs(one.value - 10.0) <= 1e-8 * 10.0 && !one.divergent;
        StripeDomain dom2 = make_domain(2, 0.25);
        MaterialParams mp2 = make_material(2, 3.0, 2.0);
        DeformationFamily bypass = default_family(FamilyKind::Bypass2D, mp2);
        EnergyBreakdown eb = integrate_energy(bypass, dom2, mp2, spec);
        const double kshear = (1.0 + 0.25) / (1.0 - 0.5);
        const double closed = 4.0 * 0.25 * (std::pow(2.0 + kshear * kshear, 1.5) - std::pow(2.0, 1.5));
        const bool ok2 = std::abs(eb.total.value - closed) <= 1e-10 * closed;
        add("quadrature_oracles", ok1 && ok2,
            "x^-0.9 err=" + num(std::abs(one.value - 10.0) / 10.0) +
                " bypass err=" + num(std::abs(eb.total.value - closed) / closed));
    }
    {
        // determinism: a small sweep rendered twice must be byte-identical
        MaterialParams mp2 = make_material(2, 3.0, 2.0);
        DeformationFamily fam = default_family(FamilyKind::CrossPinch2D, mp2);
        QuadratureSpec spec = r.spec;
        auto once = [&] { return sweep_csv(sweep(fam, {0.25, 0.125}, mp2, spec)); };
        add("determinism", once() == once(), "sweep csv bytes");
    }
}

// --- commands ---------------------------------------------------------------

int cmd_verify(RunConfig& cfg) {
    Resolved r = resolve(cfg);
    std::vector<CheckOutcome> checks;
    run_verify_checks(cfg, r, checks);
    json doc;
    doc["command"] = "verify";
    doc["seed"] = cfg.seed;
    bool all = true;
    for (const auto& c : checks) {
        doc["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        all = all && c.pass;
        std::printf("[%s] %s (%s)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    }
    doc["pass"] = all;
    OutputSet out(cfg.out);
    out.add("verify.json", doc.dump(2) + "\n");
    out.commit();
    return all ? 0 : 1;
}

int cmd_sweep(RunConfig& cfg) {
    Resolved r = resolve(cfg);
    std::vector<EnergyReport> reports = sweep(r.family, r.s_values, r.mp, r.spec);
    for (const auto& rep : reports)
        if (rep.divergent) fail(ErrorKind::Numerical, "sweep: divergent energy at s=" + num(rep.s));
    OutputSet out(cfg.out);
    out.add("sweep.csv", sweep_csv(reports));
    out.add("sweep.svg", scaling_svg({reports}, {"#1f77b4"}, {family_name(r.family.kind)}));
    out.commit();
    return 0;
}

int cmd_gap(RunConfig& cfg) {
    Resolved r = resolve(cfg);
    if (!family_is_pinch(r.family.kind))
        fail(ErrorKind::Parameter, "gap: --family must name a pinch family");
    DeformationFamily bypass = default_family(
        r.mp.d == 2 ? FamilyKind::Bypass2D : FamilyKind::Bypass3D, r.mp);
    GapReport rep = gap_report(r.family, bypass, r.s_values, r.mp, r.spec);
    std::string csv = "#schema=gap/v1\n";
    csv += "s,E_pinch,E_bypass,ratio\n";
    for (const auto& row : rep.rows)
        csv += num(row.s) + "," + num(row.e_pinch) + "," + num(row.e_bypass) + "," + num(row.ratio) + "\n";
    std::vector<EnergyReport> pinch_series, bypass_series;
    for (const auto& row : rep.rows) {
        EnergyReport a;
        a.s = row.s;
        a.total = row.e_pinch;
        pinch_series.push_back(a);
        EnergyReport b;
        b.s = row.s;
        b.total = row.e_bypass;
        bypass_series.push_back(b);
    }
    OutputSet out(cfg.out);
    out.add("gap.csv", csv);
    out.add("gap.svg", scaling_svg({pinch_series, bypass_series}, {"#1f77b4", "#d62728"},
                                   {"pinch", "bypass"}));
    out.commit();
    if (!rep.tail_decreasing)
        fail(ErrorKind::Numerical, "gap: pinch/bypass ratio is not decreasing on the sweep tail");
    return 0;
}

int cmd_cn(RunConfig& cfg) {
    Resolved r = resolve(cfg);
    StripeDomain dom = make_domain(r.mp.d, cfg.s);
    CNReport rep = cn_check(r.family, dom, r.mp, r.h);
    std::string csv = "#schema=cn/v1\n";
    csv += "family,s,h,bulk,img_lo,img_hi,verdict\n";
    csv += std::string(family_name(r.family.kind)) + "," + num(cfg.s) + "," + num(r.h) + "," +
           num(rep.bulk_integral) + "," + num(rep.image_measure_lower) + "," +
           num(rep.image_measure_upper) + "," + verdict_name(rep.verdict) + "\n";
    OutputSet out(cfg.out);
    out.add("cn.csv", csv);
    if (r.mp.d == 2) out.add("deformed.svg", deformed_svg(r.family, dom, cfg.svg_samples));
    out.commit();
    std::printf("cn: bulk=%.12g image in [%.12g, %.12g] -> %s\n", rep.bulk_integral,
                rep.image_measure_lower, rep.image_measure_upper, verdict_name(rep.verdict));
    return 0;
}

int cmd_distortion(RunConfig& cfg) {
    Resolved r = resolve(cfg);
    StripeDomain dom = make_domain(r.mp.d, cfg.s);
    std::vector<double> etas;
    if (cfg.eta > 0.0)
        etas.push_back(cfg.eta);
    else
        etas = {0.5, 0.7, 0.8, 0.9, 0.95, 1.0, 1.1};
    std::string csv = "#schema=distortion/v1\n";
    csv += "eta,level,estimate,flag\n";
    for (double eta : etas) {
        DistortionReport rep = distortion_integral(r.family, dom, eta, r.spec);
        for (std::size_t level = 0; level < rep.integral_estimates.size(); ++level)
            csv += num(eta) + "," + std::to_string(level) + "," + num(rep.integral_estimates[level]) +
                   "," + (rep.flag == DistortionFlag::Divergent ? "divergent" : "finite") + "\n";
    }
    OutputSet out(cfg.out);
    out.add("distortion.csv", csv);
    out.commit();
    return 0;
}

int cmd_intersect(RunConfig& cfg) {
    Resolved r = resolve(cfg);
    if (r.mp.d != 3) fail(ErrorKind::Parameter, "intersect requires --dim 3");
    StripeDomain dom = make_domain(3, cfg.s);
    auto witness = find_self_intersection(r.family, dom, r.sigma, cfg.grid_n);
    std::string csv = "#schema=intersect/v1\n";
    csv += "sigma,found,x1,tau1,tau2,image_x,image_y,image_z,mismatch\n";
    if (witness) {
        csv += num(r.sigma) + ",1," + num(witness->param[0]) + "," + num(witness->param[1]) + "," +
               num(witness->param[2]) + "," + num(witness->image[0]) + "," + num(witness->image[1]) +
               "," + num(witness->image[2]) + "," + num(witness->mismatch) + "\n";
    } else {
        csv += num(r.sigma) + ",0,,,,,,,\n";
    }
    OutputSet out(cfg.out);
    out.add("intersect.csv", csv);
    out.commit();
    std::printf("intersect: %s\n", witness ? "witness found" : "none");
    return 0;
}

int cmd_minimize(RunConfig& cfg) {
    Resolved r = resolve(cfg);
    StripeDomain dom = make_domain(r.mp.d, cfg.s);
    std::array<int, 3> res{cfg.res_long, cfg.res_narrow, cfg.res_narrow};
    if (r.mp.d == 3) res = {cfg.res_long, cfg.res_long, cfg.res_narrow};
    GridDeformation g = discretize(r.family, dom, res, family_is_pinch(r.family.kind));
    MinimizeOptions opts;
    opts.max_iterations = cfg.max_iters;
    MinimizeResult result = minimize(std::move(g), r.mp, opts);
    std::string csv = "#schema=minimize/v1\n";
    csv += "iter,energy,grad_norm\n";
    for (const auto& row : result.trace)
        csv += std::to_string(row.iter) + "," + num(row.energy) + "," + num(row.grad_norm) + "\n";
    std::ostringstream checkpoint;
    write_checkpoint_csv(checkpoint, result.state);
    OutputSet out(cfg.out);
    out.add("minimize.csv", csv);
    out.add("checkpoint.csv", checkpoint.str());
    out.commit();
    std::printf("minimize: %zu iterations, final energy %.12g%s\n", result.trace.size() - 1,
                result.trace.back().energy, result.stalled ? " (stalled)" : "");
    return 0;
}

int cmd_plot(RunConfig& cfg) {
    Resolved r = resolve(cfg);
    if (r.mp.d != 2) fail(ErrorKind::Parameter, "plot renders the 2D configuration figures");
    StripeDomain dom = make_domain(2, cfg.s);
    DeformationFamily bypass = default_family(FamilyKind::Bypass2D, r.mp);
    OutputSet out(cfg.out);
    out.add("reference.svg", reference_svg(dom));
    out.add("deformed_pinch.svg", deformed_svg(r.family, dom, cfg.svg_samples));
    out.add("deformed_bypass.svg", deformed_svg(bypass, dom, cfg.svg_samples));
    QuadratureSpec cheap = r.spec;
    cheap.gauss_order = 8;
    std::vector<EnergyReport> pinch_sweep = sweep(r.family, r.s_values, r.mp, cheap);
    std::vector<EnergyReport> bypass_sweep = sweep(bypass, r.s_values, r.mp, cheap);
    out.add("scaling.svg", scaling_svg({pinch_sweep, bypass_sweep}, {"#1f77b4", "#d62728"},
                                       {"pinch", "bypass"}));
    out.commit();
    return 0;
}

int dispatch(const std::string& command, RunConfig& cfg) {
    if (command == "verify") return cmd_verify(cfg);
    if (command == "sweep") return cmd_sweep(cfg);
    if (command == "gap") return cmd_gap(cfg);
    if (command == "cn") return cmd_cn(cfg);
    if (command == "distortion") return cmd_distortion(cfg);
    if (command == "intersect") return cmd_intersect(cfg);
    if (command == "minimize") return cmd_minimize(cfg);
    if (command == "plot") return cmd_plot(cfg);
    fail(ErrorKind::Parameter, "unknown command '" + command + "'");
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parameter: return 10;
        case ErrorKind::Constraint: return 11;
        case ErrorKind::SingularInput: return 12;
        case ErrorKind::Numerical: return 13;
        case ErrorKind::Domain: return 14;
        case ErrorKind::Io: return 15;
    }
    return 20;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"numerical laboratory for pinched two-strip elastic deformations"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat key=value config file");
        sub->add_option("--out", cfg.out, "output directory");
        sub->add_option("--seed", cfg.seed, "rng seed");
        sub->add_option("--dim", cfg.dim, "space dimension (2 or 3)")->check(CLI::IsMember({2, 3}));
        sub->add_option("--p", cfg.p, "gradient exponent p");
        sub->add_option("--q", cfg.q, "compression exponent q");
        sub->add_option("--alpha", cfg.alpha, "family shape parameter alpha");
        sub->add_option("--beta", cfg.beta, "family shape parameter beta");
        sub->add_option("--family", cfg.family, "datum|cross2d|crosslog2d|bypass2d|cross3d|bypass3d");
        sub->add_option("--s-list", [&cfg](const std::vector<std::string>& vals) {
            cfg.s_list.clear();
            for (const auto& v : vals)
                for (double s : parse_s_list(v)) cfg.s_list.push_back(s);
            return true;
        }, "comma-separated widths s");
        sub->add_option("--s", cfg.s, "width parameter s");
        sub->add_option("--raster-h", cfg.h, "cn raster resolution");
        sub->add_option("--sigma", cfg.sigma, "section offset sigma");
        sub->add_option("--grid-n", cfg.grid_n, "intersection scan grid");
        sub->add_option("--eta", cfg.eta, "distortion exponent");
        sub->add_option("--gauss-order", cfg.gauss_order, "quadrature nodes per cell per axis");
        sub->add_option("--grading-levels", cfg.grading_levels, "graded cells per side");
        sub->add_option("--grading-ratio", cfg.grading_ratio, "geometric grading ratio");
        sub->add_option("--refinement-cap", cfg.refinement_cap, "refinement level cap");
        sub->add_option("--res-long", cfg.res_long, "minimizer cells along the long axis");
        sub->add_option("--res-narrow", cfg.res_narrow, "minimizer cells across");
        sub->add_option("--max-iters", cfg.max_iters, "minimizer iteration cap");
        sub->add_option("--svg-samples", cfg.svg_samples, "boundary polyline sample density");
        sub->add_option("--threads", cfg.threads, "worker cap (0 = auto)");
    };

    for (const char* name : {"verify", "sweep", "gap", "cn", "distortion", "intersect", "minimize", "plot"})
        add_common(app.add_subcommand(name));

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        // two-pass parse so that config values load first and flags win
        app.parse(std::vector<std::string>(argv_rev));
        if (!config_path.empty()) {
            RunConfig merged;
            apply_config_file(config_path, merged);
            cfg = merged;
            app.clear();
            app.parse(std::vector<std::string>(argv_rev));
        }
        const std::string command = app.get_subcommands().front()->get_name();
        return dispatch(command, cfg);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help text or the parse error
        return code == 0 ? 0 : 10;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 20;
    }
}

}  // namespace lavlab
