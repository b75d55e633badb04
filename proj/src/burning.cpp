#include "blowlab/burning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "blowlab/common.hpp"

namespace blowlab {

void BurnWindow::validate() const
{
    if (d < 1) throw std::invalid_argument("window dimension must be >= 1");
    if (!(half_width > 0.0)) throw std::invalid_argument("half_width must be positive");
    if (!(t_max >= 0.0)) throw std::invalid_argument("t_max must be nonnegative");
}

double expected_atom_count(const BurnWindow& window,
                           const std::vector<DerivativeJet>& traj)
{
    window.validate();
    const int d = window.d;
    if (static_cast<int>(traj.front().jet.size()) - 1 != d)
        throw std::invalid_argument("trajectory dimension does not match window");
    if (window.t_max > traj.back().t)
        throw std::domain_error("t_max beyond trajectory coverage");
    const double mass = window.t_max > 0.0
                            ? interp_jet(traj, d - 1, window.t_max)  // = int_0^t y^(d)
                            : 0.0;
    return std::pow(2.0 * window.sample_half_width(), d) * mass;
}

PoissonAtoms sample_atoms(const BurnWindow& window,
                          const std::vector<DerivativeJet>& traj, std::uint64_t seed)
{
    window.validate();
    const int d = window.d;
    const double mean = expected_atom_count(window, traj);

    SplitMix64 rng = SplitMix64::stream(seed, 0);
    const long n = poisson(rng, mean);

    const double hw = window.sample_half_width();
    const double total_mass =
        window.t_max > 0.0 ? interp_jet(traj, d - 1, window.t_max) : 0.0;

    PoissonAtoms atoms;
    atoms.d = d;
    atoms.xs.resize(static_cast<std::size_t>(n) * d);
    atoms.s.resize(n);
    for (long i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j)
            atoms.xs[static_cast<std::size_t>(i) * d + j] = rng.uniform(-hw, hw);
        // time with density y^(d): invert the CDF y^(d-1)(s)/y^(d-1)(t_max)
        const double target = rng.uniform() * total_mass;
        atoms.s[i] = time_at_jet_value(traj, d - 1, target);
    }
    return atoms;
}

double first_burn_time(std::span<const double> z, const PoissonAtoms& atoms)
{
    const int d = atoms.d;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        double dist = 0.0;
        const double* x = atoms.xs.data() + i * d;
        for (int j = 0; j < d; ++j) dist += std::fabs(x[j] - z[j]);
        best = std::min(best, atoms.s[i] + 2.0 * dist);
    }
    return best;
}

bool is_burned(std::span<const double> z, double t, const PoissonAtoms& atoms)
{
    return first_burn_time(z, atoms) <= t;
}

double unburned_probability_analytic(double t, const std::vector<DerivativeJet>& traj)
{
    if (t == 0.0) return 1.0;
    return std::exp(-interp_x(traj, t));
}

double unburned_probability_quadrature(double t, const std::vector<DerivativeJet>& traj)
{
    if (t == 0.0) return 1.0;
    const int d = static_cast<int>(traj.front().jet.size()) - 1;
    return std::exp(-convolution_quadrature(traj, d, t));
}

MCResult mc_unburned_fraction(const BurnWindow& window,
                              const std::vector<DerivativeJet>& traj, double t,
                              long trials, std::uint64_t seed, Exec exec)
{
    if (t > window.t_max)
        throw std::invalid_argument("probe time beyond the window's t_max");
    if (window.margin() < 0.5 * t - 1e-15)
        throw std::invalid_argument("dilation too small: fires from outside the "
                                    "sampled box could reach the probe");

    std::vector<double> z(window.d, 0.0);
    std::vector<std::uint8_t> unburned(trials, 0);
    parallel_for(trials, exec, [&](std::int64_t trial) {
        PoissonAtoms atoms =
            sample_atoms(window, traj, seed ^ (0x5bd1e995ULL * (trial + 1)));
        unburned[trial] = first_burn_time(z, atoms) > t ? 1 : 0;
    });

    long count = 0;
    for (auto v : unburned) count += v;
    MCResult res;
    res.trials = trials;
    res.estimate = double(count) / double(trials);
    res.stderr_ = std::sqrt(res.estimate * (1.0 - res.estimate) / double(trials));
    return res;
}

bool BurnRaster::burned(int r, int c) const
{
    const double ft = d == 1 ? first_time[c] : first_time[r * cols + c];
    return ft <= (d == 1 ? pixel_t(r) : t_max);
}

BurnRaster render_field(const BurnWindow& window, const PoissonAtoms& atoms,
                        int resolution, Exec exec)
{
    window.validate();
    if (window.d != 1 && window.d != 2)
        throw std::invalid_argument("rendering supports d in {1, 2} only");
    if (resolution < 1) throw std::invalid_argument("resolution must be >= 1");

    BurnRaster raster;
    raster.d = window.d;
    raster.cols = resolution;
    raster.rows = resolution;
    raster.half_width = window.half_width;
    raster.t_max = window.t_max;

    if (window.d == 1) {
        raster.first_burner.assign(resolution, -1);
        raster.first_time.assign(resolution, std::numeric_limits<double>::infinity());
        parallel_for(resolution, exec, [&](std::int64_t c) {
            const double z = raster.pixel_z(static_cast<int>(c));
            double best = std::numeric_limits<double>::infinity();
            std::int32_t who = -1;
            for (std::size_t i = 0; i < atoms.size(); ++i) {
                const double ft = atoms.s[i] + 2.0 * std::fabs(atoms.xs[i] - z);
                if (ft < best) {
                    best = ft;
                    who = static_cast<std::int32_t>(i);
                }
            }
            raster.first_time[c] = best;
            raster.first_burner[c] = who;
        });
    } else {
        raster.first_burner.assign(std::size_t(resolution) * resolution, -1);
        raster.first_time.assign(std::size_t(resolution) * resolution,
                                 std::numeric_limits<double>::infinity());
        parallel_for(std::int64_t(resolution) * resolution, exec, [&](std::int64_t p) {
            const int r = static_cast<int>(p) / resolution;
            const int c = static_cast<int>(p) % resolution;
            const double z0 = raster.pixel_z(c);
            const double z1 = raster.pixel_z(r);
            double best = std::numeric_limits<double>::infinity();
            std::int32_t who = -1;
            for (std::size_t i = 0; i < atoms.size(); ++i) {
                const double ft =
                    atoms.s[i] + 2.0 * (std::fabs(atoms.xs[i * 2] - z0) +
                                        std::fabs(atoms.xs[i * 2 + 1] - z1));
                if (ft < best) {
                    best = ft;
                    who = static_cast<std::int32_t>(i);
                }
            }
            raster.first_time[p] = best;
            raster.first_burner[p] = who;
        });
    }
    return raster;
}

namespace {

// Hash the atom index to a saturated hue; unburned pixels stay white.
void atom_color(std::int32_t idx, unsigned char rgb[3])
{
    SplitMix64 h(0xc01030ULL + static_cast<std::uint64_t>(idx));
    const double hue = 6.0 * h.uniform();
    const double s = 0.65, v = 0.95;
    const int i = static_cast<int>(hue);
    const double f = hue - i;
    const double p = v * (1 - s), q = v * (1 - s * f), u = v * (1 - s * (1 - f));
    double r, g, b;
    switch (i % 6) {
        case 0: r = v; g = u; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = u; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = u; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
    rgb[0] = static_cast<unsigned char>(255 * r);
    rgb[1] = static_cast<unsigned char>(255 * g);
    rgb[2] = static_cast<unsigned char>(255 * b);
}

}  // namespace

void write_ppm(const BurnRaster& raster, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "P6\n" << raster.cols << " " << raster.rows << "\n255\n";
    std::vector<unsigned char> row(std::size_t(raster.cols) * 3);
    for (int r = 0; r < raster.rows; ++r) {
        for (int c = 0; c < raster.cols; ++c) {
            unsigned char* px = &row[std::size_t(c) * 3];
            const std::int32_t who =
                raster.d == 1 ? raster.first_burner[c]
                              : raster.first_burner[std::size_t(r) * raster.cols + c];
            if (who >= 0 && raster.burned(r, c)) {
                atom_color(who, px);
            } else {
                px[0] = px[1] = px[2] = 255;
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
}

void write_legend_csv(const PoissonAtoms& atoms, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "index";
    for (int j = 0; j < atoms.d; ++j) out << ",x" << j;
    out << ",s,r,g,b\n";
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        unsigned char rgb[3];
        atom_color(static_cast<std::int32_t>(i), rgb);
        out << i;
        for (int j = 0; j < atoms.d; ++j) out << "," << fmt17(atoms.xs[i * atoms.d + j]);
        out << "," << fmt17(atoms.s[i]) << "," << int(rgb[0]) << "," << int(rgb[1])
            << "," << int(rgb[2]) << "\n";
    }
}

std::vector<CoverageRow> coverage_rate_check(const std::vector<DerivativeJet>& traj,
                                             double T, double window_half_width,
                                             const std::vector<double>& eps_list,
                                             long trials, std::uint64_t seed,
                                             Exec exec)
{
    std::vector<CoverageRow> rows;
    for (double eps : eps_list) {
        const double t = T - eps;
        if (t > traj.back().t)
            throw std::domain_error("eps too small for trajectory coverage");
        CoverageRow row;
        row.eps = eps;
        row.analytic_exponent = interp_x(traj, t) / std::log(1.0 / eps);
        if (trials > 0) {
            BurnWindow w{.d = static_cast<int>(traj.front().jet.size()) - 1,
                         .half_width = window_half_width,
                         .t_max = t};
            const MCResult mc = mc_unburned_fraction(w, traj, t, trials, seed, exec);
            row.mc_estimate = mc.estimate;
            row.stderr_ = mc.stderr_;
            row.trials = mc.trials;
        }
        rows.push_back(row);
    }
    return rows;
}

PoissonAtoms filter_to_box(const PoissonAtoms& atoms, double half_width)
{
    PoissonAtoms out;
    out.d = atoms.d;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        bool inside = true;
        for (int j = 0; j < atoms.d; ++j)
            if (std::fabs(atoms.xs[i * atoms.d + j]) > half_width) inside = false;
        if (!inside) continue;
        for (int j = 0; j < atoms.d; ++j) out.xs.push_back(atoms.xs[i * atoms.d + j]);
        out.s.push_back(atoms.s[i]);
    }
    return out;
}

}  // namespace blowlab
