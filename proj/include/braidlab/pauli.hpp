#pragma once

#include "braidlab/linalg.hpp"

#include <bit>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>

namespace braidlab {

inline constexpr int max_dense_qubits = 10;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// phased Pauli string: i^phase * (letters). Bit q of x/z refers to qubit q.
// Y is stored as x=z=1 and means the Hermitian Y, not XZ.
class PauliString {
public:
    PauliString() = default;
    explicit PauliString(int n) : n_(n) { check_n(n); }

    // letters like "XIZY", qubit 0 leftmost
    static PauliString from_letters(const std::string& letters, int phase = 0)
    {
        PauliString p(static_cast<int>(letters.size()));
        for (int q = 0; q < p.n_; ++q) p.set(q, letters[q]);
        p.phase_ = phase & 3;
        return p;
    }

    // sparse construction: {{0,'Z'},{2,'X'}}
    static PauliString on(int n, std::initializer_list<std::pair<int, char>> items, int phase = 0)
    {
        PauliString p(n);
        for (auto [q, c] : items) {
            if (q < 0 || q >= n) throw DimensionError("qubit index out of range");
            p.set(q, c);
        }
        p.phase_ = phase & 3;
        return p;
    }

    // "+i XIZY", "-ZZ", "+XX"
    static PauliString parse(const std::string& text)
    {
        std::string s;
        for (char c : text)
            if (c != ' ') s += c;
        int phase = 0;
        std::size_t pos = 0;
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
            if (s[pos] == '-') phase = 2;
            ++pos;
        }
        if (pos < s.size() && s[pos] == 'i') {
            phase += 1;
            ++pos;
        }
        std::string letters = s.substr(pos);
        for (char c : letters)
            if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
                throw std::invalid_argument("bad Pauli letter in '" + text + "'");
        if (letters.empty()) throw std::invalid_argument("empty Pauli string");
        return from_letters(letters, phase);
    }

    int n_qubits() const { return n_; }
    std::uint64_t x_bits() const { return x_; }
    std::uint64_t z_bits() const { return z_; }
    int phase() const { return phase_; }
    cplx phase_value() const
    {
        static const cplx tab[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        return tab[phase_];
    }

    char letter(int q) const
    {
        bool xb = (x_ >> q) & 1, zb = (z_ >> q) & 1;
        return xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : 'I');
    }

    PauliString stripped() const
    {
        PauliString p = *this;
        p.phase_ = 0;
        return p;
    }
    PauliString with_phase(int k) const
    {
        PauliString p = *this;
        p.phase_ = k & 3;
        return p;
    }
    PauliString times_phase(int k) const { return with_phase(phase_ + k); }

    bool is_identity() const { return x_ == 0 && z_ == 0; }
    bool is_hermitian() const { return (phase_ & 1) == 0; }
    int weight() const { return std::popcount(x_ | z_); }

    std::string letters() const
    {
        std::string s;
        for (int q = 0; q < n_; ++q) s += letter(q);
        return s;
    }

    std::string str() const
    {
        static const char* tok[4] = {"+", "+i", "-", "-i"};
        return std::string(tok[phase_]) + " " + letters();
    }

    bool operator==(const PauliString& o) const
    {
        return n_ == o.n_ && x_ == o.x_ && z_ == o.z_ && phase_ == o.phase_;
    }
    // ordering on letters only (used as map key for stripped strings)
    bool letters_less(const PauliString& o) const
    {
        return std::tie(n_, x_, z_) < std::tie(o.n_, o.x_, o.z_);
    }

    // P|b> = coeff |b ^ flip>, with b a basis index (qubit 0 = most significant bit)
    std::uint64_t index_flip_mask() const { return to_index_mask(x_); }
    std::uint64_t index_z_mask() const { return to_index_mask(z_); }
    int y_count() const { return std::popcount(x_ & z_); }

    cplx amplitude_on(std::uint64_t b) const
    {
        int k = phase_ + y_count() + 2 * (std::popcount(b & index_z_mask()) & 1);
        return PauliString(1).with_phase(k).phase_value();
    }

private:
    friend PauliString multiply(const PauliString& a, const PauliString& b);

    static void check_n(int n)
    {
        if (n < 1 || n > 64) throw DimensionError("PauliString supports 1..64 qubits");
    }
    void set(int q, char c)
    {
        std::uint64_t m = std::uint64_t{1} << q;
        x_ &= ~m;
        z_ &= ~m;
        switch (c) {
        case 'I': break;
        case 'X': x_ |= m; break;
        case 'Z': z_ |= m; break;
        case 'Y': x_ |= m; z_ |= m; break;
        default: throw std::invalid_argument(std::string("bad Pauli letter ") + c);
        }
    }
    std::uint64_t to_index_mask(std::uint64_t bits) const
    {
        std::uint64_t out = 0;
        for (int q = 0; q < n_; ++q)
            if ((bits >> q) & 1) out |= std::uint64_t{1} << (n_ - 1 - q);
        return out;
    }

    int n_ = 1;
    std::uint64_t x_ = 0, z_ = 0;
    int phase_ = 0;
};

inline PauliString multiply(const PauliString& a, const PauliString& b)
{
    if (a.n_ != b.n_) throw DimensionError("multiply: qubit count mismatch");
    // single-qubit products: XY = iZ, YZ = iX, ZX = iY and reversed with -i
    int k = a.phase_ + b.phase_;
    for (int q = 0; q < a.n_; ++q) {
        char la = a.letter(q), lb = b.letter(q);
        if (la == 'I' || lb == 'I' || la == lb) continue;
        bool cyclic = (la == 'X' && lb == 'Y') || (la == 'Y' && lb == 'Z') || (la == 'Z' && lb == 'X');
        k += cyclic ? 1 : 3;
    }
    PauliString p(a.n_);
    p.x_ = a.x_ ^ b.x_;
    p.z_ = a.z_ ^ b.z_;
    p.phase_ = k & 3;
    return p;
}

inline PauliString operator*(const PauliString& a, const PauliString& b) { return multiply(a, b); }

inline bool commutes(const PauliString& a, const PauliString& b)
{
    if (a.n_qubits() != b.n_qubits()) throw DimensionError("commutes: qubit count mismatch");
    int s = std::popcount((a.x_bits() & b.z_bits()) ^ (a.z_bits() & b.x_bits()));
    return (s & 1) == 0;
}

inline std::ostream& operator<<(std::ostream& os, const PauliString& p) { return os << p.str(); }

// weighted sum of phase-free Pauli strings
class OperatorSum {
public:
    OperatorSum() = default;
    explicit OperatorSum(int n) : n_(n) {}
    OperatorSum(const PauliString& p) : n_(p.n_qubits()) { add(1.0, p); }

    int n_qubits() const { return n_; }
    const std::vector<std::pair<cplx, PauliString>>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    OperatorSum& add(cplx c, const PauliString& p)
    {
        if (n_ == 0) n_ = p.n_qubits();
        if (p.n_qubits() != n_) throw DimensionError("OperatorSum: qubit count mismatch");
        cplx coeff = c * p.phase_value();
        PauliString s = p.stripped();
        for (auto it = terms_.begin(); it != terms_.end(); ++it) {
            if (!it->second.letters_less(s) && !s.letters_less(it->second)) {
                it->first += coeff;
                if (std::abs(it->first) == 0.0) terms_.erase(it);
                return *this;
            }
            if (s.letters_less(it->second)) {
                if (coeff != 0.0) terms_.insert(it, {coeff, s});
                return *this;
            }
        }
        if (coeff != 0.0) terms_.push_back({coeff, s});
        return *this;
    }

    OperatorSum& operator+=(const OperatorSum& o)
    {
        for (const auto& [c, p] : o.terms_) add(c, p);
        return *this;
    }
    friend OperatorSum operator+(OperatorSum a, const OperatorSum& b) { return a += b; }
    friend OperatorSum operator*(cplx c, OperatorSum a)
    {
        OperatorSum out(a.n_);
        for (const auto& [k, p] : a.terms_) out.add(c * k, p);
        return out;
    }
    friend OperatorSum operator*(const OperatorSum& a, const OperatorSum& b)
    {
        OperatorSum out(a.n_);
        for (const auto& [ca, pa] : a.terms_)
            for (const auto& [cb, pb] : b.terms_) out.add(ca * cb, multiply(pa, pb));
        return out;
    }

    // drop terms below tol
    OperatorSum pruned(double tol = 1e-14) const
    {
        OperatorSum out(n_);
        for (const auto& [c, p] : terms_)
            if (std::abs(c) > tol) out.terms_.push_back({c, p});
        return out;
    }

    bool is_hermitian(double tol = 1e-12) const
    {
        for (const auto& [c, p] : terms_)
            if (std::abs(c.imag()) > tol) return false;
        return true;
    }

    // out += this * in, for a state vector of length 2^n
    void apply_add(const cplx* in, cplx* out, cplx scale = 1.0) const
    {
        const std::uint64_t dim = std::uint64_t{1} << n_;
        for (const auto& [c, p] : terms_) {
            std::uint64_t flip = p.index_flip_mask(), zm = p.index_z_mask();
            cplx base = c * scale * PauliString(1).with_phase(p.y_count()).phase_value();
            for (std::uint64_t b = 0; b < dim; ++b) {
                cplx v = (std::popcount(b & zm) & 1) ? -base : base;
                out[b ^ flip] += v * in[b];
            }
        }
    }

    Vec apply(const Vec& v) const
    {
        check_vec(v);
        Vec out = Vec::Zero(v.size());
        apply_add(v.data(), out.data());
        return out;
    }

    Mat to_dense(int cap = max_dense_qubits) const
    {
        if (n_ > cap) throw DimensionError("to_dense: qubit count exceeds cap");
        const std::uint64_t dim = std::uint64_t{1} << n_;
        Mat m = Mat::Zero(dim, dim);
        for (const auto& [c, p] : terms_) {
            std::uint64_t flip = p.index_flip_mask();
            for (std::uint64_t b = 0; b < dim; ++b) m(b ^ flip, b) += c * p.amplitude_on(b);
        }
        return m;
    }

    std::string str() const
    {
        std::ostringstream os;
        for (const auto& [c, p] : terms_) os << "(" << c.real() << "," << c.imag() << ") " << p.letters() << "\n";
        return os.str();
    }

private:
    void check_vec(const Vec& v) const
    {
        if (v.size() != (Eigen::Index{1} << n_)) throw DimensionError("state length does not match operator");
    }

    int n_ = 0;
    std::vector<std::pair<cplx, PauliString>> terms_;
};

inline Mat to_dense(const PauliString& p, int cap = max_dense_qubits) { return OperatorSum(p).to_dense(cap); }
inline Mat to_dense(const OperatorSum& op, int cap = max_dense_qubits) { return op.to_dense(cap); }

// P|psi> for a single string
inline Vec apply_pauli(const PauliString& p, const Vec& v) { return OperatorSum(p).apply(v); }

} // namespace braidlab
