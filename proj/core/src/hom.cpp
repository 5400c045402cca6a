#include "qdcav/hom.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace qdcav {

namespace {

double conservative_z = 1.96;  // reported errors are ~95% bounds, dark-count band included

// primitive of exp(-|u|/tau): P(x) = sign(x) tau (1 - exp(-|x|/tau))
inline double exp_primitive(double x, double tau) {
    const double s = x >= 0.0 ? 1.0 : -1.0;
    return s * tau * (1.0 - std::exp(-std::abs(x) / tau));
}
inline double exp_primitive_dtau(double x, double tau) {
    const double s = x >= 0.0 ? 1.0 : -1.0;
    const double r = std::abs(x) / tau;
    return s * (1.0 - std::exp(-r) * (1.0 + r));
}

struct BinBasis {
    double mean;   // bin mean of exp(-|t-c|/tau) at unit amplitude
    double dmean_dc;
    double dmean_dtau;
};

inline BinBasis bin_basis(double bin_center, double bin_width, double peak_center, double tau) {
    const double a = bin_center - 0.5 * bin_width - peak_center;
    const double b = bin_center + 0.5 * bin_width - peak_center;
    BinBasis out;
    out.mean = (exp_primitive(b, tau) - exp_primitive(a, tau)) / bin_width;
    out.dmean_dc = (std::exp(-std::abs(a) / tau) - std::exp(-std::abs(b) / tau)) / bin_width;
    out.dmean_dtau = (exp_primitive_dtau(b, tau) - exp_primitive_dtau(a, tau)) / bin_width;
    return out;
}

struct PeakLayout {
    std::vector<long> index;       // comb indices
    double rep_period;
};

// peaks whose centers fall strictly inside [lo, hi] and inside the data range
std::vector<long> peaks_in_window(double lo, double hi, double rep, double offset) {
    std::vector<long> idx;
    const long kmin = static_cast<long>(std::ceil((lo - offset) / rep));
    const long kmax = static_cast<long>(std::floor((hi - offset) / rep));
    for (long k = kmin; k <= kmax; ++k) idx.push_back(k);
    return idx;
}

struct FitWork {
    std::vector<double> t;  // clipped bin centers
    std::vector<double> y;
    std::vector<double> w;  // Poisson weights 1/max(y,1)
    std::vector<long> peaks;
    double rep{0.0};
    double bin{0.0};

    std::size_t n_par() const { return peaks.size() + 3; }  // B, A..., tau, t0

    double center(std::size_t k, double t0) const {
        return t0 + static_cast<double>(peaks[k]) * rep;
    }

    // weighted normal equations over the linear parameters (B, A) at fixed (tau, t0)
    void linear_normal(double tau, double t0, Eigen::MatrixXd& N, Eigen::VectorXd& b) const {
        const std::size_t m = peaks.size();
        N.setZero(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(m + 1));
        b.setZero(static_cast<Eigen::Index>(m + 1));
        const double reach = std::min(0.75 * rep, 45.0 * tau);
        for (std::size_t i = 0; i < t.size(); ++i) {
            double e[3];
            int kk[3];
            int na = 0;
            const long knear = std::lround((t[i] - t0) / rep);
            for (long k = knear - 1; k <= knear + 1; ++k) {
                const auto it = std::lower_bound(peaks.begin(), peaks.end(), k);
                if (it == peaks.end() || *it != k) continue;
                const auto kidx = static_cast<int>(it - peaks.begin());
                const double d = std::abs(t[i] - center(static_cast<std::size_t>(kidx), t0));
                if (d > reach) continue;
                e[na] = bin_basis(t[i], bin, center(static_cast<std::size_t>(kidx), t0), tau).mean;
                kk[na] = kidx + 1;  // column 0 is the baseline
                ++na;
            }
            const double wi = w[i];
            N(0, 0) += wi;
            b(0) += wi * y[i];
            for (int a = 0; a < na; ++a) {
                N(0, kk[a]) += wi * e[a];
                N(kk[a], 0) += wi * e[a];
                b(kk[a]) += wi * y[i] * e[a];
                for (int c = 0; c < na; ++c) N(kk[a], kk[c]) += wi * e[a] * e[c];
            }
        }
    }

    double model_at(std::size_t i, double B, const Eigen::VectorXd& A, double tau, double t0) const {
        double m = B;
        const long knear = std::lround((t[i] - t0) / rep);
        for (long k = knear - 1; k <= knear + 1; ++k) {
            const auto it = std::lower_bound(peaks.begin(), peaks.end(), k);
            if (it == peaks.end() || *it != k) continue;
            const auto kidx = static_cast<std::size_t>(it - peaks.begin());
            m += A(static_cast<Eigen::Index>(kidx)) * bin_basis(t[i], bin, center(kidx, t0), tau).mean;
        }
        return m;
    }
};

// nonnegative weighted linear LS by active-set iteration
double solve_nnls(const FitWork& work, double tau, double t0, Eigen::VectorXd& x) {
    const auto n = static_cast<Eigen::Index>(work.peaks.size() + 1);
    Eigen::MatrixXd N;
    Eigen::VectorXd b;
    work.linear_normal(tau, t0, N, b);

    std::vector<bool> clamped(static_cast<std::size_t>(n), false);
    x.setZero(n);
    for (int round = 0; round < 2 * static_cast<int>(n); ++round) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!clamped[static_cast<std::size_t>(j)]) free.push_back(j);
        }
        Eigen::MatrixXd Nf(free.size(), free.size());
        Eigen::VectorXd bf(free.size());
        for (std::size_t a = 0; a < free.size(); ++a) {
            bf(static_cast<Eigen::Index>(a)) = b(free[a]);
            for (std::size_t c = 0; c < free.size(); ++c) {
                Nf(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = N(free[a], free[c]);
            }
        }
        Eigen::VectorXd xf = Nf.ldlt().solve(bf);
        x.setZero(n);
        Eigen::Index worst = -1;
        double worst_v = 0.0;
        for (std::size_t a = 0; a < free.size(); ++a) {
            const double v = xf(static_cast<Eigen::Index>(a));
            x(free[a]) = v;
            if (v < worst_v) {
                worst_v = v;
                worst = free[a];
            }
        }
        if (worst >= 0) {
            clamped[static_cast<std::size_t>(worst)] = true;
            continue;
        }
        // KKT: release any clamped variable whose gradient wants it positive
        Eigen::VectorXd grad = N * x - b;
        Eigen::Index release = -1;
        double most = -1.0e-12;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (clamped[static_cast<std::size_t>(j)] && grad(j) < most) {
                most = grad(j);
                release = j;
            }
        }
        if (release < 0) break;
        clamped[static_cast<std::size_t>(release)] = false;
    }

    // chi^2
    double chi2 = 0.0;
    Eigen::VectorXd A = x.tail(n - 1);
    for (std::size_t i = 0; i < work.t.size(); ++i) {
        const double r = work.y[i] - work.model_at(i, x(0), A, tau, t0);
        chi2 += work.w[i] * r * r;
    }
    return chi2;
}

} // namespace

void CoincidenceHistogram::validate() const {
    if (bin_centers_ns.size() < 3 || bin_centers_ns.size() != counts.size()) {
        throw std::invalid_argument("CoincidenceHistogram: need matching bin/count arrays");
    }
    const double d = bin_centers_ns[1] - bin_centers_ns[0];
    if (!(d > 0.0)) throw std::invalid_argument("CoincidenceHistogram: bins must increase");
    for (std::size_t i = 0; i + 1 < bin_centers_ns.size(); ++i) {
        if (std::abs(bin_centers_ns[i + 1] - bin_centers_ns[i] - d) > 1.0e-6 * d) {
            throw std::invalid_argument("CoincidenceHistogram: bin spacing not uniform");
        }
    }
    for (double c : counts) {
        if (!(c >= 0.0)) throw std::invalid_argument("CoincidenceHistogram: negative counts");
    }
    if (!(rep_period_ns > 0.0)) throw std::invalid_argument("CoincidenceHistogram: bad rep period");
}

double CoincidenceHistogram::bin_width_ns() const { return bin_centers_ns[1] - bin_centers_ns[0]; }

CoincidenceHistogram read_histogram(std::istream& is) {
    CoincidenceHistogram h;
    std::string line;
    while (std::getline(is, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        for (char& c : line) {
            if (c == ',' || c == ';' || c == '\t') c = ' ';
        }
        std::istringstream ls(line);
        double t = 0.0, c = 0.0;
        if (!(ls >> t >> c)) {
            throw std::invalid_argument("read_histogram: malformed line: " + line);
        }
        h.bin_centers_ns.push_back(t);
        h.counts.push_back(c);
    }
    h.validate();
    return h;
}

void write_histogram(const CoincidenceHistogram& h, std::ostream& os) {
    os << "# delay_ns counts\n";
    for (std::size_t i = 0; i < h.bin_centers_ns.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", h.bin_centers_ns[i], h.counts[i]);
        os << buf;
    }
}

std::size_t PeakTrainFit::zero_peak() const {
    for (std::size_t k = 0; k < peak_index.size(); ++k) {
        if (peak_index[k] == 0) return k;
    }
    throw std::invalid_argument("PeakTrainFit: no zero-delay peak in the fitted window");
}

PeakTrainFit fit_peak_train(const CoincidenceHistogram& h, double window_lo_ns,
                            double window_hi_ns, const FitOptions& opt) {
    h.validate();
    const double rep = h.rep_period_ns;
    if (!(window_hi_ns - window_lo_ns >= 10.0 * rep)) {
        throw std::invalid_argument("fit_peak_train: window must cover >= 10 repetition periods");
    }

    FitWork work;
    work.rep = rep;
    work.bin = h.bin_width_ns();
    for (std::size_t i = 0; i < h.bin_centers_ns.size(); ++i) {
        if (h.bin_centers_ns[i] < window_lo_ns || h.bin_centers_ns[i] > window_hi_ns) continue;
        work.t.push_back(h.bin_centers_ns[i]);
        work.y.push_back(h.counts[i]);
        work.w.push_back(1.0 / std::max(h.counts[i], 1.0));
    }
    if (work.t.size() < 16) throw std::invalid_argument("fit_peak_train: too few bins in window");
    if (*std::max_element(work.y.begin(), work.y.end()) <= 0.0) {
        throw std::invalid_argument("fit_peak_train: degenerate data (all-zero counts)");
    }

    // initial comb offset from a one-period cross-correlation scan
    const double bw = h.bin_width_ns();
    double t0 = 0.0;
    {
        double best = -1.0;
        const long n_off = std::lround(rep / bw);
        for (long o = 0; o < n_off; ++o) {
            const double cand = -0.5 * rep + static_cast<double>(o) * bw;
            double s = 0.0;
            for (long k = static_cast<long>(std::ceil((work.t.front() - cand) / rep));
                 cand + static_cast<double>(k) * rep <= work.t.back(); ++k) {
                const double tc = cand + static_cast<double>(k) * rep;
                const auto i = static_cast<std::size_t>(
                    std::clamp<double>(std::round((tc - work.t.front()) / bw), 0.0,
                                       static_cast<double>(work.t.size() - 1)));
                s += work.y[i];
            }
            if (s > best) {
                best = s;
                t0 = cand;
            }
        }
    }

    work.peaks = peaks_in_window(std::max(window_lo_ns, work.t.front()),
                                 std::min(window_hi_ns, work.t.back()), rep, t0);
    if (work.peaks.size() < 3) throw std::invalid_argument("fit_peak_train: too few peaks in window");

    // variable projection: coordinate descent on (ln tau, t0) around the exact
    // linear solve, with shrinking steps
    double ltau = std::log(opt.tau_init_ns);
    Eigen::VectorXd lin;
    double chi2 = solve_nnls(work, std::exp(ltau), t0, lin);
    double dl = 0.4, dt = 0.5 * bw;
    for (std::size_t it = 0; it < opt.max_outer; ++it) {
        bool improved = false;
        for (int dim = 0; dim < 2; ++dim) {
            for (int s = -1; s <= 1; s += 2) {
                const double cl = ltau + (dim == 0 ? s * dl : 0.0);
                const double ct = t0 + (dim == 1 ? s * dt : 0.0);
                Eigen::VectorXd cand;
                const double c2 = solve_nnls(work, std::exp(cl), ct, cand);
                if (c2 < chi2 - 1.0e-12) {
                    chi2 = c2;
                    ltau = cl;
                    t0 = ct;
                    lin = cand;
                    improved = true;
                }
            }
        }
        if (!improved) {
            dl *= 0.5;
            dt *= 0.5;
            if (dl < 1.0e-9) break;
        }
    }
    double tau = std::exp(ltau);

    // full Levenberg-Marquardt polish over (B, A, tau, t0)
    const std::size_t m = work.peaks.size();
    const std::size_t np = m + 3;
    Eigen::VectorXd p(static_cast<Eigen::Index>(np));
    p(0) = lin(0);
    for (std::size_t k = 0; k < m; ++k) p(static_cast<Eigen::Index>(1 + k)) = lin(static_cast<Eigen::Index>(1 + k));
    p(static_cast<Eigen::Index>(m + 1)) = tau;
    p(static_cast<Eigen::Index>(m + 2)) = t0;

    const auto eval = [&](const Eigen::VectorXd& q, Eigen::VectorXd* resid, Eigen::MatrixXd* jac) {
        const double B = q(0);
        const double tq = q(static_cast<Eigen::Index>(m + 1));
        const double oq = q(static_cast<Eigen::Index>(m + 2));
        double c2 = 0.0;
        for (std::size_t i = 0; i < work.t.size(); ++i) {
            const double sw = std::sqrt(work.w[i]);
            double model = B;
            double dtau = 0.0, doff = 0.0;
            const long knear = std::lround((work.t[i] - oq) / rep);
            double de[3];
            int kidx[3];
            int na = 0;
            for (long k = knear - 1; k <= knear + 1; ++k) {
                const auto itp = std::lower_bound(work.peaks.begin(), work.peaks.end(), k);
                if (itp == work.peaks.end() || *itp != k) continue;
                const auto ki = static_cast<std::size_t>(itp - work.peaks.begin());
                const BinBasis bb =
                    bin_basis(work.t[i], work.bin, oq + static_cast<double>(k) * rep, tq);
                const double A = q(static_cast<Eigen::Index>(1 + ki));
                model += A * bb.mean;
                dtau += A * bb.dmean_dtau;
                doff += A * bb.dmean_dc;
                de[na] = bb.mean;
                kidx[na] = static_cast<int>(ki);
                ++na;
            }
            const double r = work.y[i] - model;
            c2 += work.w[i] * r * r;
            if (resid) (*resid)(static_cast<Eigen::Index>(i)) = sw * r;
            if (jac) {
                (*jac)(static_cast<Eigen::Index>(i), 0) = sw;
                for (int a = 0; a < na; ++a) {
                    (*jac)(static_cast<Eigen::Index>(i), 1 + kidx[a]) = sw * de[a];
                }
                (*jac)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m + 1)) = sw * dtau;
                (*jac)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m + 2)) = sw * doff;
            }
        }
        return c2;
    };

    // projected gradient: bound-clamped parameters with inward-pushing
    // gradients are KKT-satisfied and do not count against convergence
    const auto projected_norm = [&m](const Eigen::VectorXd& q, const Eigen::VectorXd& Jtr) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < q.size(); ++k) {
            const bool at_zero = (k <= static_cast<Eigen::Index>(m)) && q(k) <= 1.0e-12;
            if (at_zero && Jtr(k) < 0.0) continue;
            acc += Jtr(k) * Jtr(k);
        }
        return std::sqrt(acc);
    };

    const auto nb = static_cast<Eigen::Index>(work.t.size());
    Eigen::VectorXd resid(nb);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(nb, static_cast<Eigen::Index>(np));
    double lambda = 1.0e-6;
    chi2 = eval(p, &resid, &jac);
    double gnorm = projected_norm(p, jac.transpose() * resid);
    const double gscale = 1.0 + std::sqrt(chi2);
    for (std::size_t it = 0; it < opt.max_polish; ++it) {
        Eigen::MatrixXd JtJ = jac.transpose() * jac;
        Eigen::VectorXd Jtr = jac.transpose() * resid;
        gnorm = projected_norm(p, Jtr);
        if (gnorm <= opt.gradient_tol * gscale) break;
        Eigen::MatrixXd Aug = JtJ;
        Aug.diagonal() += lambda * JtJ.diagonal();
        Eigen::VectorXd step = Aug.ldlt().solve(Jtr);
        Eigen::VectorXd cand = p + step;
        cand(0) = std::max(cand(0), 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            auto j = static_cast<Eigen::Index>(1 + k);
            cand(j) = std::max(cand(j), 0.0);
        }
        cand(static_cast<Eigen::Index>(m + 1)) =
            std::max(cand(static_cast<Eigen::Index>(m + 1)), 1.0e-6);
        const double c2 = eval(cand, nullptr, nullptr);
        if (c2 < chi2) {
            p = cand;
            lambda = std::max(lambda * 0.3, 1.0e-12);
            const double prev = chi2;
            chi2 = eval(p, &resid, &jac);
            if (prev - chi2 < 1.0e-14 * (1.0 + chi2)) {
                gnorm = projected_norm(p, jac.transpose() * resid);
                break;
            }
        } else {
            lambda *= 8.0;
            if (lambda > 1.0e8) {
                gnorm = projected_norm(p, jac.transpose() * resid);
                break;
            }
        }
    }
    if (gnorm > 1.0e3 * opt.gradient_tol * gscale) {
        throw std::runtime_error("fit_peak_train: no convergence, last weighted residual " +
                                 std::to_string(chi2));
    }

    PeakTrainFit fit;
    fit.baseline = p(0);
    fit.amplitudes.resize(m);
    for (std::size_t k = 0; k < m; ++k) fit.amplitudes[k] = p(static_cast<Eigen::Index>(1 + k));
    fit.tau_ns = p(static_cast<Eigen::Index>(m + 1));
    fit.time_offset_ns = p(static_cast<Eigen::Index>(m + 2));
    fit.peak_index = work.peaks;
    fit.rep_period_ns = rep;
    fit.bin_width_ns = bw;
    fit.gradient_norm = gnorm;
    fit.chi2_reduced = chi2 / static_cast<double>(work.t.size() - np);

    Eigen::MatrixXd JtJ = jac.transpose() * jac;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(JtJ);
    fit.covariance = cod.pseudoInverse();
    return fit;
}

G2Result extract_g2(const PeakTrainFit& fit, std::size_t n_uncorrelated, PeakAverage mode) {
    const std::size_t z = fit.zero_peak();

    std::vector<std::size_t> side;
    for (std::size_t k = 0; k < fit.n_peaks(); ++k) {
        if (k == z) continue;
        if (mode == PeakAverage::hom && std::labs(fit.peak_index[k]) == 1) continue;
        side.push_back(k);
    }
    std::sort(side.begin(), side.end(), [&](std::size_t a, std::size_t b) {
        return std::labs(fit.peak_index[a]) < std::labs(fit.peak_index[b]);
    });
    if (side.size() < n_uncorrelated) {
        throw std::invalid_argument("extract_g2: insufficient side peaks (" +
                                    std::to_string(side.size()) + " < " +
                                    std::to_string(n_uncorrelated) + ")");
    }
    side.resize(n_uncorrelated);

    double mean_amp = 0.0;
    for (auto k : side) mean_amp += fit.amplitudes[k];
    mean_amp /= static_cast<double>(side.size());
    if (!(mean_amp > 0.0)) throw std::runtime_error("extract_g2: vanishing side-peak mean");

    const double a0 = fit.amplitudes[z];
    const double ratio = a0 / mean_amp;  // shared tau cancels in the area ratio

    // statistical error through the full fit covariance
    const std::size_t np = fit.n_peaks() + 3;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(np));
    grad(static_cast<Eigen::Index>(1 + z)) = 1.0 / mean_amp;
    for (auto k : side) {
        grad(static_cast<Eigen::Index>(1 + k)) =
            -a0 / (mean_amp * mean_amp * static_cast<double>(side.size()));
    }
    const double var_stat = grad.transpose() * fit.covariance * grad;

    // dark-count band: baseline fluctuations of one Poisson deviation feed
    // coherently into every peak amplitude
    const double band = std::sqrt(std::max(fit.baseline, 1.0));
    const double sys = band * (1.0 + ratio) / mean_amp;

    G2Result r;
    r.g2_zero = ratio;
    r.error = conservative_z * std::sqrt(std::max(var_stat, 0.0) + sys * sys);
    r.n_side_peaks = side.size();
    return r;
}

HOMResult corrected_indistinguishability(double g2_zero, double a0_over_mean, double R, double T,
                                         double epsilon, double g2_error, double a0_error) {
    if (!(R > 0.0 && R < 1.0 && T > 0.0 && T < 1.0)) {
        throw std::invalid_argument("corrected_indistinguishability: R, T must lie in (0,1)");
    }
    if (std::abs(R + T - 1.0) > 1.0e-6) {
        throw std::invalid_argument("corrected_indistinguishability: R + T must equal 1");
    }
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("corrected_indistinguishability: epsilon must lie in [0,1)");
    }
    if (!std::isfinite(g2_zero) || !std::isfinite(a0_over_mean)) {
        throw std::invalid_argument("corrected_indistinguishability: inputs must be finite");
    }

    const double c1 = (R * R + T * T) / (2.0 * R * T);
    const double c2 = (R + T) * (R + T) / (2.0 * R * T);
    const double vis = (1.0 - epsilon) * (1.0 - epsilon);

    HOMResult r;
    r.g2_zero = g2_zero;
    r.g2_error = g2_error;
    r.a0_over_mean = a0_over_mean;
    r.a0_error = a0_error;
    r.R = R;
    r.T = T;
    r.epsilon = epsilon;
    r.I_unclamped = (g2_zero + c1 - c2 * a0_over_mean) / vis;
    r.I_raw = (c1 - c2 * a0_over_mean) / vis;
    r.out_of_range = r.I_unclamped < 0.0 || r.I_unclamped > 1.0;
    r.I_corrected = std::clamp(r.I_unclamped, 0.0, 1.0);

    const double sigma =
        std::sqrt(g2_error * g2_error + c2 * c2 * a0_error * a0_error) / vis;
    // profile-style bounds truncated to the physical interval
    r.err_plus = std::min(1.0, r.I_corrected + sigma) - r.I_corrected;
    r.err_minus = r.I_corrected - std::max(0.0, r.I_corrected - sigma);
    return r;
}

double double_exp_bin_mean(double bin_center, double bin_width, double peak_center, double tau) {
    if (!(tau > 0.0) || !(bin_width > 0.0)) {
        throw std::invalid_argument("double_exp_bin_mean: tau and bin width must be > 0");
    }
    return bin_basis(bin_center, bin_width, peak_center, tau).mean;
}

double hom_zero_peak_ratio(double programmed_I, double programmed_g2, double R, double T,
                           double epsilon) {
    const double c1 = (R * R + T * T) / (2.0 * R * T);
    const double c2 = (R + T) * (R + T) / (2.0 * R * T);
    const double vis = (1.0 - epsilon) * (1.0 - epsilon);
    const double a = (programmed_g2 + c1 - programmed_I * vis) / c2;
    if (a < -1.0e-9) {
        throw std::invalid_argument("hom_zero_peak_ratio: programmed values give a negative peak");
    }
    return std::max(a, 0.0);
}

CoincidenceHistogram synth_histogram(const SynthSpec& spec, std::uint64_t seed) {
    if (!(spec.tau_ns > 0.0) || !(spec.side_amplitude > 0.0) || !(spec.bin_ns > 0.0)) {
        throw std::invalid_argument("synth_histogram: tau, amplitude and bin width must be > 0");
    }
    CoincidenceHistogram h;
    h.rep_period_ns = spec.rep_period_ns;
    h.hom_delay_ns = spec.hom_delay_ns;

    const auto nbins = static_cast<std::size_t>(
        std::floor((spec.window_hi_ns - spec.window_lo_ns) / spec.bin_ns));
    h.bin_centers_ns.resize(nbins);
    h.counts.resize(nbins);

    const auto peaks = peaks_in_window(spec.window_lo_ns, spec.window_hi_ns, spec.rep_period_ns,
                                       spec.time_offset_ns);
    std::vector<double> amp(peaks.size(), spec.side_amplitude);
    for (std::size_t k = 0; k < peaks.size(); ++k) {
        if (peaks[k] == 0) {
            amp[k] = spec.hbt ? spec.programmed_g2 * spec.side_amplitude
                              : hom_zero_peak_ratio(spec.programmed_I, spec.programmed_g2, spec.R,
                                                    spec.T, spec.epsilon) *
                                    spec.side_amplitude;
        } else if (!spec.hbt && std::labs(peaks[k]) == 1) {
            amp[k] = 0.75 * spec.side_amplitude;  // partial overlap of the delayed pulse pair
        }
    }

    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < nbins; ++i) {
        const double t = spec.window_lo_ns + (static_cast<double>(i) + 0.5) * spec.bin_ns;
        h.bin_centers_ns[i] = t;
        double mean = spec.baseline;
        for (std::size_t k = 0; k < peaks.size(); ++k) {
            const double c = spec.time_offset_ns + static_cast<double>(peaks[k]) * spec.rep_period_ns;
            mean += amp[k] * double_exp_bin_mean(t, spec.bin_ns, c, spec.tau_ns);
        }
        std::poisson_distribution<long> poisson(mean);
        h.counts[i] = (mean > 0.0) ? static_cast<double>(poisson(rng)) : 0.0;
    }
    return h;
}

} // namespace qdcav
