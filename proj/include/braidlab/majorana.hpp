#pragma once

#include "braidlab/model.hpp"

namespace braidlab {

// Majorana operators on a chain of auxiliary qubits (one qubit per fermionic mode):
// gamma_{2k} = (prod_{j<k} Z_j) X_k, gamma_{2k+1} = (prod_{j<k} Z_j) Y_k
class MajoranaSystem {
public:
    explicit MajoranaSystem(int n_modes) : n_modes_(n_modes)
    {
        if (n_modes != 2 && n_modes != 5) throw std::invalid_argument("MajoranaSystem: 2 or 5 modes");
        for (int k = 0; k < n_modes; ++k)
            for (char c : {'X', 'Y'}) {
                std::string letters(n_modes, 'I');
                for (int j = 0; j < k; ++j) letters[j] = 'Z';
                letters[k] = c;
                ops_.push_back(PauliString::from_letters(letters));
            }
    }

    int n_modes() const { return n_modes_; }
    int n_majoranas() const { return 2 * n_modes_; }
    const PauliString& gamma(int a) const { return ops_.at(a); }

    // named Majoranas: g0..g3, g0'..g3', z0, z1
    const PauliString& named(const std::string& name) const
    {
        static const std::vector<std::string> order{"g0", "g1", "g2", "g3", "g0'", "g1'", "g2'", "g3'", "z0", "z1"};
        for (std::size_t i = 0; i < order.size(); ++i)
            if (order[i] == name) {
                if (static_cast<int>(i) >= n_majoranas()) break;
                return ops_[i];
            }
        throw std::invalid_argument("no Majorana named '" + name + "' in this system");
    }

    // i a b
    OperatorSum bilinear(const std::string& a, const std::string& b) const
    {
        return OperatorSum(multiply(named(a), named(b)).times_phase(1));
    }

private:
    int n_modes_;
    std::vector<PauliString> ops_;
};

namespace detail {
inline void add_majorana_arm(OperatorSum& h, const MajoranaSystem& sys, const ClockArm& arm, const std::string& c,
                             const std::string& mz, const std::string& my, const std::string& mx)
{
    auto [dx, dy, dz] = arm.cartesian();
    h += cplx(dz) * sys.bilinear(c, mz);
    h += cplx(dy) * sys.bilinear(c, my);
    h += cplx(dx) * sys.bilinear(c, mx);
}
} // namespace detail

// one arm: i g0 (Dz g1 + Dy g2 + Dx g3) on 2 modes.
// three arms (left, right, middle): adds the primed copy and i z0 (Lz z1 + Ly g3' + Lx g2) on 5 modes.
inline OperatorSum build_majorana_hamiltonian(const std::vector<ClockArm>& arms)
{
    if (arms.size() != 1 && arms.size() != 3) throw std::invalid_argument("build_majorana_hamiltonian: 1 or 3 arms");
    MajoranaSystem sys(arms.size() == 1 ? 2 : 5);
    OperatorSum h(sys.n_modes());
    detail::add_majorana_arm(h, sys, arms[0], "g0", "g1", "g2", "g3");
    if (arms.size() == 3) {
        detail::add_majorana_arm(h, sys, arms[1], "g0'", "g1'", "g2'", "g3'");
        detail::add_majorana_arm(h, sys, arms[2], "z0", "z1", "g3'", "g2");
    }
    return h.pruned(1e-14);
}

// h~ = i g0 g1, n~ = i g2 g3 (plus primed and h~a for five modes)
inline std::vector<std::pair<std::string, OperatorSum>> parity_operators(const MajoranaSystem& sys)
{
    std::vector<std::pair<std::string, OperatorSum>> out{{"h", sys.bilinear("g0", "g1")}, {"n", sys.bilinear("g2", "g3")}};
    if (sys.n_modes() == 5) {
        out.push_back({"h'", sys.bilinear("g0'", "g1'")});
        out.push_back({"n'", sys.bilinear("g2'", "g3'")});
        out.push_back({"ha", sys.bilinear("z0", "z1")});
    }
    return out;
}

} // namespace braidlab
