// Coincidence-histogram pipeline: double-exponential peak-train fits with
// Poisson weighting over a dark-count baseline, g2(0) extraction, and the
// beamsplitter/visibility-corrected two-photon indistinguishability.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qdcav {

struct CoincidenceHistogram {
    std::vector<double> bin_centers_ns;
    std::vector<double> counts;       // non-negative integers (stored as double)
    double rep_period_ns{12.195};     // 82 MHz laser
    double hom_delay_ns{12.2};        // interferometer delay

    void validate() const;  // uniform bin spacing to 1e-6 relative, counts >= 0
    double bin_width_ns() const;
};

// two-column delimited text (delay_ns counts), '#' comment lines
CoincidenceHistogram read_histogram(std::istream& is);
void write_histogram(const CoincidenceHistogram& h, std::ostream& os);

struct FitOptions {
    double tau_init_ns{0.25};
    std::size_t max_outer{300};    // coordinate-descent iterations on (ln tau, offset)
    std::size_t max_polish{60};    // full Levenberg-Marquardt polish iterations
    double gradient_tol{1.0e-6};   // relative weighted-gradient norm at convergence
};

struct PeakTrainFit {
    double baseline{0.0};        // B, counts per bin
    double tau_ns{0.0};          // common double-exponential decay
    double time_offset_ns{0.0};  // single global offset of the peak comb
    std::vector<long> peak_index;       // peak k sits at offset + peak_index[k] * rep_period
    std::vector<double> amplitudes;     // A_k >= 0
    Eigen::MatrixXd covariance;         // over (B, A_0..A_{m-1}, tau, offset)
    double chi2_reduced{0.0};
    double gradient_norm{0.0};
    double rep_period_ns{0.0};
    double bin_width_ns{0.0};

    std::size_t n_peaks() const { return amplitudes.size(); }
    // closed-form double-exponential area 2 A tau
    double area(std::size_t k) const { return 2.0 * amplitudes[k] * tau_ns; }
    // index into peak arrays of the zero-delay peak; throws if absent
    std::size_t zero_peak() const;
};

// Bound-constrained (B, A >= 0, tau > 0) nonlinear least squares with
// Poisson weights 1/max(count, 1); peak centers fixed at the known comb
// plus one fitted global offset. Throws on non-convergence / all-zero data.
PeakTrainFit fit_peak_train(const CoincidenceHistogram& h, double window_lo_ns,
                            double window_hi_ns, const FitOptions& opt = {});

enum class PeakAverage {
    hbt,  // mean over all side peaks
    hom,  // mean excluding the peaks at +-1 repetition period (interferometer delay)
};

struct G2Result {
    double g2_zero{0.0};
    double error{0.0};  // conservative bound: 1.96 sigma including the dark-count band
    std::size_t n_side_peaks{0};
};

// ratio of the zero-delay peak area to the mean side-peak area
G2Result extract_g2(const PeakTrainFit& fit, std::size_t n_uncorrelated = 50,
                    PeakAverage mode = PeakAverage::hbt);

struct HOMResult {
    double g2_zero{0.0};
    double g2_error{0.0};
    double a0_over_mean{0.0};
    double a0_error{0.0};
    double R{0.5};
    double T{0.5};
    double epsilon{0.0};
    double I_raw{0.0};        // without the g2 correction
    double I_corrected{0.0};  // reported value, clamped to [0, 1] only when flagged
    double I_unclamped{0.0};
    double err_plus{0.0};     // asymmetric bounds, truncated to [0, 1]
    double err_minus{0.0};
    bool out_of_range{false};
};

HOMResult corrected_indistinguishability(double g2_zero, double a0_over_mean, double R, double T,
                                         double epsilon, double g2_error = 0.0,
                                         double a0_error = 0.0);

// deterministic Poisson-sampled test fixture
struct SynthSpec {
    double programmed_I{1.0};
    double programmed_g2{0.0};
    double tau_ns{0.25};
    double baseline{10.0};        // counts per bin
    double side_amplitude{500.0}; // counts at a side-peak maximum
    double bin_ns{0.128};
    double window_lo_ns{-15.0};
    double window_hi_ns{615.0};  // holds the 52-peak train: 50 HBT / 49 HOM side peaks
    double rep_period_ns{12.195};
    double hom_delay_ns{12.2};
    double R{0.502};
    double T{0.498};
    double epsilon{0.005};
    bool hbt{false};  // HBT pattern (A_0 = g2 <A>) instead of the HOM pattern
    double time_offset_ns{0.0};
};

// zero-delay amplitude implied by (I, g2) through the corrected-visibility relation
double hom_zero_peak_ratio(double programmed_I, double programmed_g2, double R, double T,
                           double epsilon);

// mean of exp(-|t - center|/tau) over a bin: counts are bin integrals, and
// the bin mean stays differentiable in the peak position where the point
// sample has a kink
double double_exp_bin_mean(double bin_center, double bin_width, double peak_center, double tau);

CoincidenceHistogram synth_histogram(const SynthSpec& spec, std::uint64_t seed);

} // namespace qdcav
