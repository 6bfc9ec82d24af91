#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "unifact/errors.hpp"
#include "unifact/rational.hpp"

namespace unifact {

/// Exact multivariate polynomial with RationalComplex coefficients.
/// Terms map exponent vectors (aligned with vars()) to nonzero coefficients;
/// the variable list is kept sorted so equal polynomials compare equal.
class Polynomial {
public:
    using Exponents = std::vector<std::uint32_t>;
    using TermMap = std::map<Exponents, RationalComplex>;

    Polynomial() = default;

    static Polynomial constant(RationalComplex c) {
        Polynomial p;
        if (!c.is_zero()) p.terms_[{}] = std::move(c);
        return p;
    }
    static Polynomial constant(long long n) { return constant(RationalComplex(n)); }

    static Polynomial variable(const std::string& name) {
        Polynomial p;
        p.vars_ = {name};
        p.terms_[{1}] = RationalComplex(1);
        return p;
    }

    const std::vector<std::string>& vars() const { return vars_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }

    friend bool operator==(const Polynomial& a, const Polynomial& b) {
        Polynomial x = a, y = b;
        auto all = merged_vars(x, y);
        x = x.on_vars(all);
        y = y.on_vars(all);
        return x.terms_ == y.terms_;
    }
    friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        auto all = merged_vars(a, b);
        Polynomial x = a.on_vars(all), y = b.on_vars(all);
        for (const auto& [e, c] : y.terms_) x.add_term(e, c);
        return x;
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        auto all = merged_vars(a, b);
        Polynomial x = a.on_vars(all), y = b.on_vars(all);
        for (const auto& [e, c] : y.terms_) x.add_term(e, -c);
        return x;
    }
    friend Polynomial operator-(const Polynomial& a) {
        Polynomial r = a;
        for (auto& [e, c] : r.terms_) c = -c;
        return r;
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        auto all = merged_vars(a, b);
        Polynomial x = a.on_vars(all), y = b.on_vars(all);
        Polynomial r;
        r.vars_ = all;
        for (const auto& [ea, ca] : x.terms_)
            for (const auto& [eb, cb] : y.terms_) {
                Exponents e(all.size());
                for (std::size_t i = 0; i < all.size(); ++i) e[i] = ea[i] + eb[i];
                r.add_term(e, ca * cb);
            }
        return r;
    }
    Polynomial& operator+=(const Polynomial& o) { return *this = *this + o; }
    Polynomial& operator-=(const Polynomial& o) { return *this = *this - o; }
    Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

    Polynomial pow(std::uint32_t k) const {
        Polynomial r = constant(1);
        for (std::uint32_t i = 0; i < k; ++i) r *= *this;
        return r;
    }

    Polynomial partial_derivative(const std::string& var) const {
        const auto pos = var_index(var);
        Polynomial r;
        r.vars_ = vars_;
        if (!pos) return Polynomial(); // constant in var
        for (const auto& [e, c] : terms_) {
            if (e[*pos] == 0) continue;
            Exponents d = e;
            const std::uint32_t k = d[*pos]--;
            r.add_term(d, RationalComplex(static_cast<long long>(k)) * c);
        }
        return r.pruned();
    }

    /// Replace one variable by a polynomial.
    Polynomial substitute(const std::string& var, const Polynomial& value) const {
        const auto pos = var_index(var);
        if (!pos) return *this;
        std::vector<std::string> rest = vars_;
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(*pos));
        Polynomial r;
        for (const auto& [e, c] : terms_) {
            Exponents re;
            re.reserve(rest.size());
            for (std::size_t i = 0; i < e.size(); ++i)
                if (i != *pos) re.push_back(e[i]);
            Polynomial term;
            term.vars_ = rest;
            term.terms_[re] = c;
            r += term * value.pow(e[*pos]);
        }
        return r;
    }

    /// Exact evaluation; every variable must be assigned.
    RationalComplex evaluate(const std::map<std::string, RationalComplex>& point) const {
        RationalComplex acc(0);
        std::vector<RationalComplex> vals;
        vals.reserve(vars_.size());
        for (const auto& v : vars_) {
            auto it = point.find(v);
            if (it == point.end()) throw BadInput("polynomial evaluate: missing variable " + v);
            vals.push_back(it->second);
        }
        for (const auto& [e, c] : terms_) {
            RationalComplex t = c;
            for (std::size_t i = 0; i < e.size(); ++i)
                for (std::uint32_t k = 0; k < e[i]; ++k) t *= vals[i];
            acc += t;
        }
        return acc;
    }

    /// Floating-point evaluation for sampled backends.
    cdouble evaluate_c(const std::map<std::string, cdouble>& point) const {
        cdouble acc = 0.0;
        std::vector<cdouble> vals;
        vals.reserve(vars_.size());
        for (const auto& v : vars_) {
            auto it = point.find(v);
            if (it == point.end()) throw BadInput("polynomial evaluate: missing variable " + v);
            vals.push_back(it->second);
        }
        for (const auto& [e, c] : terms_) {
            cdouble t = c.to_cdouble();
            for (std::size_t i = 0; i < e.size(); ++i)
                for (std::uint32_t k = 0; k < e[i]; ++k) t *= vals[i];
            acc += t;
        }
        return acc;
    }

    /// Re-index terms onto a variable superset (sorted); used by arithmetic.
    Polynomial on_vars(const std::vector<std::string>& all) const {
        Polynomial r;
        r.vars_ = all;
        std::vector<std::size_t> where(vars_.size());
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            auto it = std::lower_bound(all.begin(), all.end(), vars_[i]);
            if (it == all.end() || *it != vars_[i])
                throw BadInput("polynomial on_vars: missing variable");
            where[i] = static_cast<std::size_t>(it - all.begin());
        }
        for (const auto& [e, c] : terms_) {
            Exponents ne(all.size(), 0);
            for (std::size_t i = 0; i < e.size(); ++i) ne[where[i]] = e[i];
            r.terms_[ne] = c;
        }
        return r;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [e, c] : terms_) {
            if (!first) os << " + ";
            first = false;
            os << c.str();
            for (std::size_t i = 0; i < e.size(); ++i) {
                if (e[i] == 0) continue;
                os << "*" << vars_[i];
                if (e[i] > 1) os << "^" << e[i];
            }
        }
        return os.str();
    }

    static std::vector<std::string> merged_vars(const Polynomial& a, const Polynomial& b) {
        std::vector<std::string> all = a.vars_;
        all.insert(all.end(), b.vars_.begin(), b.vars_.end());
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        return all;
    }

private:
    std::vector<std::string> vars_; // sorted
    TermMap terms_;

    std::optional<std::size_t> var_index(const std::string& v) const {
        auto it = std::lower_bound(vars_.begin(), vars_.end(), v);
        if (it == vars_.end() || *it != v) return std::nullopt;
        return static_cast<std::size_t>(it - vars_.begin());
    }

    void add_term(const Exponents& e, const RationalComplex& c) {
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            if (!c.is_zero()) terms_[e] = c;
            return;
        }
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }

    Polynomial pruned() const {
        Polynomial r;
        r.vars_ = vars_;
        for (const auto& [e, c] : terms_)
            if (!c.is_zero()) r.terms_[e] = c;
        return r;
    }

    friend Polynomial divide_exact(const Polynomial&, const Polynomial&, std::uint32_t);
};

/// Single-divisor multivariate long division under the lex order induced by
/// the sorted variable list. Over a field of coefficients the remainder is
/// zero exactly when the divisor divides p, so a nonzero remainder is a
/// certificate of non-divisibility.
inline Polynomial divide_exact(const Polynomial& p, const Polynomial& f, std::uint32_t k = 1) {
    if (f.is_zero()) throw BadInput("divide_exact: divisor is zero");
    Polynomial cur = p;
    for (std::uint32_t round = 0; round < k; ++round) {
        auto all = Polynomial::merged_vars(cur, f);
        Polynomial num = cur.on_vars(all);
        Polynomial den = f.on_vars(all);
        // leading term = last entry of the lex-ordered map
        const auto& lead = *den.terms_.rbegin();
        Polynomial quot;
        quot.vars_ = all;
        std::vector<Polynomial::Exponents> offending;
        while (!num.terms_.empty()) {
            const auto& top = *num.terms_.rbegin();
            Polynomial::Exponents qe(all.size());
            bool divisible = true;
            for (std::size_t i = 0; i < all.size(); ++i) {
                if (top.first[i] < lead.first[i]) {
                    divisible = false;
                    break;
                }
                qe[i] = top.first[i] - lead.first[i];
            }
            if (!divisible) {
                offending.push_back(top.first);
                if (offending.size() >= 4) break;
                num.terms_.erase(std::prev(num.terms_.end()));
                continue;
            }
            Polynomial t;
            t.vars_ = all;
            t.terms_[qe] = top.second / lead.second;
            quot += t;
            num -= t * den;
        }
        if (!offending.empty()) {
            std::ostringstream os;
            os << "divide_exact: remainder is nonzero at power " << (round + 1)
               << "; offending monomial exponents:";
            for (const auto& e : offending) {
                os << " (";
                for (std::size_t i = 0; i < e.size(); ++i) os << (i ? "," : "") << e[i];
                os << ")";
            }
            throw NotDivisible(os.str());
        }
        cur = quot;
    }
    return cur;
}

} // namespace unifact
