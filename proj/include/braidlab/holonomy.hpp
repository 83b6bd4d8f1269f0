#pragma once

#include "braidlab/majorana.hpp"
#include "braidlab/subspace.hpp"

#include <memory>
#include <unordered_map>

namespace braidlab {

// (polar, azimuth) of the active arm: (theta, phi), (theta', phi') or (alpha, beta)
struct PathPoint {
    double a = 0.0, b = 0.0;
};

struct PathSegment {
    PathPoint start, end;
    int steps = 1;
};

// piecewise path, linear in (polar, azimuth); meridians and the equator are great circles
struct ParamPath {
    Arm arm = Arm::Left;
    std::vector<PathSegment> segments;

    PathPoint start() const { return segments.front().start; }
    PathPoint end() const { return segments.back().end; }

    // poles are the same point for every azimuth
    bool closed(double tol = 1e-12) const
    {
        if (segments.empty()) return true;
        auto s = start(), e = end();
        if (std::abs(s.a - e.a) > tol) return false;
        if (std::abs(std::sin(s.a)) < tol) return true;
        double d = std::remainder(s.b - e.b, 2 * pi);
        return std::abs(d) <= tol;
    }

    // signed area, integral of (1 - cos theta) dphi
    double solid_angle() const
    {
        double total = 0;
        for (const auto& sg : segments) {
            double dt = sg.end.a - sg.start.a, dp = sg.end.b - sg.start.b;
            double mean_cos = std::abs(dt) < 1e-15 ? std::cos(sg.start.a) : (std::sin(sg.end.a) - std::sin(sg.start.a)) / dt;
            total += dp * (1.0 - mean_cos);
        }
        return total;
    }

    int total_steps() const
    {
        int n = 0;
        for (const auto& sg : segments) n += sg.steps;
        return n;
    }

    // start point followed by the end of every step
    std::vector<PathPoint> points() const
    {
        std::vector<PathPoint> out;
        if (segments.empty()) return out;
        out.push_back(start());
        for (const auto& sg : segments)
            for (int k = 1; k <= sg.steps; ++k) {
                double t = static_cast<double>(k) / sg.steps;
                out.push_back({sg.start.a + t * (sg.end.a - sg.start.a), sg.start.b + t * (sg.end.b - sg.start.b)});
            }
        return out;
    }
};

// ---- frames and gauge fields of the effective models

namespace detail {
// exp(i t G / 2) for an involutory Hermitian G
inline Mat half_exp(const Mat& g, double t)
{
    return std::cos(t / 2) * Mat::Identity(g.rows(), g.cols()) + I_unit * std::sin(t / 2) * g;
}
} // namespace detail

inline int effective_dim(Arm arm) { return arm == Arm::Middle ? 8 : 4; }
inline int low_dim(Arm arm) { return arm == Arm::Middle ? 4 : 2; }

// unitary frame V with H_eff = -V tau_z V^dagger (chi_z for the middle arm);
// the first low_dim columns span the low-energy space
inline Mat frame_unitary(Arm arm, double a, double b)
{
    using namespace pauli_mat;
    if (arm == Arm::Middle) {
        Mat c0 = detail::half_exp(kron({z(), id(), id()}), -pi / 2) * detail::half_exp(kron({id(), z(), id()}), -pi / 2) *
                 kron({id(), id(), z()});
        return c0 * detail::half_exp(kron({z(), x(), x()}), b) * detail::half_exp(kron({x(), x(), id()}), a);
    }
    Mat ez = kron(id(), z());
    return detail::half_exp(ez, pi / 2) * detail::half_exp(ez, b) * detail::half_exp(kron(y(), y()), -a);
}

struct GaugeField {
    Mat a_polar;   // A_theta, A_theta', A_alpha
    Mat a_azimuth; // A_phi, A_phi', A_beta
};

inline GaugeField analytic_gauge_fields(Arm arm, double a, double b)
{
    using namespace pauli_mat;
    (void)b;
    if (arm == Arm::Middle)
        return {0.5 * I_unit * kron({x(), x(), id()}),
                0.5 * I_unit * (std::cos(a) * kron({z(), x(), x()}) - std::sin(a) * kron({y(), id(), x()}))};
    return {-0.5 * I_unit * kron(y(), y()), 0.5 * I_unit * (std::cos(a) * kron(id(), z()) - std::sin(a) * kron(y(), x()))};
}

// central differences of V^dagger dV
inline GaugeField finite_difference_gauge_fields(Arm arm, double a, double b, double h = 1e-5)
{
    Mat v = frame_unitary(arm, a, b);
    Mat da = (frame_unitary(arm, a + h, b) - frame_unitary(arm, a - h, b)) / (2 * h);
    Mat db = (frame_unitary(arm, a, b + h) - frame_unitary(arm, a, b - h)) / (2 * h);
    return {v.adjoint() * da, v.adjoint() * db};
}

// ---- Wilson loops

using MatrixFamily = std::function<Mat(const PathPoint&)>;

class GapClosure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct WilsonResult {
    Mat u;      // holonomy in the basis of frame0
    Mat frame0; // low-energy eigenvectors at the start point
    std::vector<double> phases;
    double min_gap = 0.0;
};

// path-ordered product of polar-unitarized overlaps F_{i+1}^dagger F_i of the k lowest eigenvectors
inline WilsonResult wilson_loop(const MatrixFamily& family, const ParamPath& path, int k, double gap_tol = 1e-6)
{
    if (!path.closed()) throw std::invalid_argument("wilson_loop: path is not closed");
    auto pts = path.points();
    if (pts.size() < 2) throw std::invalid_argument("wilson_loop: path has no steps");
    double min_gap = std::numeric_limits<double>::infinity();
    auto frame = [&](const PathPoint& p) {
        Eigen::SelfAdjointEigenSolver<Mat> es(family(p));
        const auto& e = es.eigenvalues();
        if (k < 1 || k >= e.size()) throw std::invalid_argument("wilson_loop: k out of range");
        double gap = e(k) - e(k - 1);
        double scale = std::max(1e-300, e.cwiseAbs().maxCoeff());
        min_gap = std::min(min_gap, gap / scale);
        if (gap < gap_tol * scale) {
            std::ostringstream os;
            os << "wilson_loop: spectral gap " << gap << " below " << gap_tol << " x " << scale << " at (" << p.a << ", " << p.b
               << "); the selected subspace changes dimension";
            throw GapClosure(os.str());
        }
        return Mat(es.eigenvectors().leftCols(k));
    };
    Mat f0 = frame(pts.front());
    Mat prev = f0;
    Mat u = Mat::Identity(k, k);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        Mat cur = i + 1 == pts.size() ? f0 : frame(pts[i]);
        u = polar_unitary(cur.adjoint() * prev) * u;
        prev = cur;
    }
    return {u, f0, eigenphases(u), min_gap};
}

// sector-projected family of a Pauli Hamiltonian; projections of each string are cached
inline MatrixFamily sector_family(std::function<OperatorSum(const PathPoint&)> h_of, const LabeledBasis& basis)
{
    struct Cache {
        Mat b;
        std::unordered_map<std::uint64_t, Mat> terms;
    };
    auto cache = std::make_shared<Cache>();
    cache->b = basis.matrix();
    return [h_of = std::move(h_of), cache](const PathPoint& p) {
        OperatorSum h = h_of(p);
        const Eigen::Index k = cache->b.cols();
        Mat m = Mat::Zero(k, k);
        for (const auto& [c, s] : h.terms()) {
            std::uint64_t key = (s.x_bits() << 32) | s.z_bits();
            auto it = cache->terms.find(key);
            if (it == cache->terms.end()) it = cache->terms.emplace(key, restrict_to_code(s, cache->b)).first;
            m += c * it->second;
        }
        return Mat(0.5 * (m + m.adjoint()));
    };
}

inline MatrixFamily spin_arm_family(const SystemSpec& base, Arm arm)
{
    check_arm(base, arm);
    return sector_family([base, arm](const PathPoint& p) { return hamiltonian(base.with_arm(arm, p.a, p.b)); },
                         sector_basis(base, arm));
}

inline MatrixFamily analytic_family(Arm arm)
{
    return [arm](const PathPoint& p) { return analytic_effective(arm, p.a, p.b); };
}

// single-arm Majorana model i g0 (Delta . gamma), 2 modes
inline MatrixFamily majorana_family(double magnitude = 1.0)
{
    return [magnitude](const PathPoint& p) {
        return build_majorana_hamiltonian({ClockArm{magnitude, p.a, p.b}}).to_dense();
    };
}

// P exp(-int A_low) times the closure V(s0)^dagger V(s_end), in the basis of V(s0)'s low columns
inline Mat analytic_holonomy(const ParamPath& path)
{
    const Arm arm = path.arm;
    const int k = low_dim(arm);
    Mat u = Mat::Identity(k, k);
    for (const auto& sg : path.segments) {
        const double da = (sg.end.a - sg.start.a) / sg.steps, db = (sg.end.b - sg.start.b) / sg.steps;
        for (int i = 0; i < sg.steps; ++i) {
            double t = (i + 0.5) / sg.steps;
            GaugeField g = analytic_gauge_fields(arm, sg.start.a + t * (sg.end.a - sg.start.a), sg.start.b + t * (sg.end.b - sg.start.b));
            Mat a = (g.a_polar * da + g.a_azimuth * db).topLeftCorner(k, k);
            u = expm_antihermitian(-a) * u;
        }
    }
    Mat v0 = frame_unitary(arm, path.start().a, path.start().b), v1 = frame_unitary(arm, path.end().a, path.end().b);
    Mat closure = (v0.adjoint() * v1).topLeftCorner(k, k);
    return closure * u;
}

// re-express a holonomy given in basis `from` (columns) in basis `to` spanning the same space
inline Mat change_frame(const Mat& u, const Mat& from, const Mat& to)
{
    Mat c = to.adjoint() * from;
    return c * u * c.adjoint();
}

struct SpinHolonomy {
    WilsonResult wilson;
    Mat logical; // holonomy in the logical computational basis
    Mat support; // projector onto the logical states the loop reaches (identity unless one 10-qubit side arm moves)
};

// Wilson loop on the spin model, mapped to the logical basis through the idle code space
inline SpinHolonomy spin_holonomy(const SystemSpec& base, const ParamPath& path)
{
    const Arm arm = path.arm;
    if (std::abs(path.start().a) > 1e-12) throw std::invalid_argument("spin_holonomy: loops start at the idle point");
    LabeledBasis sb = sector_basis(base, arm);
    WilsonResult w = wilson_loop(spin_arm_family(base, arm), path, low_dim(arm));
    Mat phys_frame = sb.matrix() * w.frame0;
    Mat code = code_matrix(base.with_arm(arm, 0.0, 0.0));
    Mat c = code.adjoint() * phys_frame;
    if (!(c.adjoint() * c).isIdentity(1e-8)) throw std::logic_error("spin_holonomy: idle low-energy space is not the code space");
    return {w, c * w.u * c.adjoint(), c * c.adjoint()};
}

// the R_xx holonomy of the middle arm (left and right arms idle)
inline SpinHolonomy middle_arm_holonomy(const ParamPath& path)
{
    if (path.arm != Arm::Middle) throw std::invalid_argument("middle_arm_holonomy: path must move the middle arm");
    return spin_holonomy(SystemSpec::ten_qubit(), path);
}

} // namespace braidlab
