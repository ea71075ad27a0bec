#include "qgpr/kernels.hpp"

#include "qgpr/simd/kernels.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qgpr {

// ---------------------------------------------------------------------------
// Base kernels

double rbf_from_sq(double d2, double theta) { return std::exp(-theta * d2); }

double rq_from_sq(double d2, double alpha, double l) {
    return std::pow(1.0 + d2 / (2.0 * alpha * l * l), -alpha);
}

double periodic_from_sq(double d2, double p, double l) {
    const double s = std::sin(std::numbers::pi * std::sqrt(d2) / p);
    return std::exp(-2.0 * s * s / (l * l));
}

double matern_from_sq(double d2, double nu, double l) {
    const double r = std::sqrt(d2) / l;
    if (nu == 0.5) return std::exp(-r);
    if (nu == 1.5) {
        const double a = std::sqrt(3.0) * r;
        return (1.0 + a) * std::exp(-a);
    }
    if (nu == 2.5) {
        const double a = std::sqrt(5.0) * r;
        return (1.0 + a + 5.0 * r * r / 3.0) * std::exp(-a);
    }
    throw std::invalid_argument("matern: unsupported nu " + std::to_string(nu));
}

double eval_rbf(std::span<const double> x, std::span<const double> xp, double theta) {
    return rbf_from_sq(simd::active().sq_distance(x.data(), xp.data(), x.size()), theta);
}

double eval_dot(std::span<const double> x, std::span<const double> xp) {
    return simd::active().dot(x.data(), xp.data(), x.size());
}

double eval_rq(std::span<const double> x, std::span<const double> xp, double alpha, double l) {
    return rq_from_sq(simd::active().sq_distance(x.data(), xp.data(), x.size()), alpha, l);
}

double eval_periodic(std::span<const double> x, std::span<const double> xp, double p, double l) {
    return periodic_from_sq(simd::active().sq_distance(x.data(), xp.data(), x.size()), p, l);
}

double eval_matern(std::span<const double> x, std::span<const double> xp, double nu, double l) {
    return matern_from_sq(simd::active().sq_distance(x.data(), xp.data(), x.size()), nu, l);
}

namespace {

struct KindInfo {
    BaseKind kind;
    std::string_view name;
    std::array<std::string_view, 2> params;
    std::size_t count;
};

constexpr std::array<KindInfo, 7> kKinds{{
    {BaseKind::RBF, "RBF", {"th", ""}, 1},
    {BaseKind::DOT, "DOT", {"", ""}, 0},
    {BaseKind::RQ, "RQ", {"a", "l"}, 2},
    {BaseKind::PER, "PER", {"p", "l"}, 2},
    {BaseKind::MAT12, "MAT12", {"l", ""}, 1},
    {BaseKind::MAT32, "MAT32", {"l", ""}, 1},
    {BaseKind::MAT52, "MAT52", {"l", ""}, 1},
}};

const KindInfo& info(BaseKind kind) { return kKinds[static_cast<std::size_t>(kind)]; }

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw std::runtime_error("format_number failed");
    return std::string(buf.data(), end);
}

}  // namespace

std::string_view kind_name(BaseKind kind) { return info(kind).name; }
std::size_t kind_param_count(BaseKind kind) { return info(kind).count; }

double matern_nu(BaseKind kind) {
    switch (kind) {
        case BaseKind::MAT12: return 0.5;
        case BaseKind::MAT32: return 1.5;
        case BaseKind::MAT52: return 2.5;
        default: throw std::invalid_argument("matern_nu: not a Matern kind");
    }
}

BaseKernel BaseKernel::make(BaseKind kind) {
    return BaseKernel{kind, std::vector<double>(kind_param_count(kind), 1.0)};
}

double BaseKernel::eval_sq(double d2, double inner) const {
    switch (kind) {
        case BaseKind::RBF: return rbf_from_sq(d2, shape[0]);
        case BaseKind::DOT: return inner;
        case BaseKind::RQ: return rq_from_sq(d2, shape[0], shape[1]);
        case BaseKind::PER: return periodic_from_sq(d2, shape[0], shape[1]);
        case BaseKind::MAT12:
        case BaseKind::MAT32:
        case BaseKind::MAT52: return matern_from_sq(d2, matern_nu(kind), shape[0]);
    }
    return 0.0;
}

double BaseKernel::eval(std::span<const double> x, std::span<const double> xp) const {
    const auto& k = simd::active();
    if (kind == BaseKind::DOT) return k.dot(x.data(), xp.data(), x.size());
    return eval_sq(k.sq_distance(x.data(), xp.data(), x.size()), 0.0);
}

std::vector<BaseKernel> default_bases() {
    std::vector<BaseKernel> out;
    for (const auto& k : kKinds) out.push_back(BaseKernel::make(k.kind));
    return out;
}

// ---------------------------------------------------------------------------
// Expression tree

KernelExpr KernelExpr::leaf(BaseKernel base) {
    if (base.shape.size() != kind_param_count(base.kind))
        throw std::invalid_argument("KernelExpr::leaf: wrong number of shape parameters");
    auto n = std::make_shared<Node>();
    n->op = Op::Leaf;
    n->base = std::move(base);
    return KernelExpr(std::move(n));
}

KernelExpr KernelExpr::scaled(double c, KernelExpr child) {
    if (child.op() == Op::Scaled) throw std::invalid_argument("KernelExpr::scaled: nested scaling");
    auto n = std::make_shared<Node>();
    n->op = Op::Scaled;
    n->coef = {c};
    n->children = {std::move(child)};
    return KernelExpr(std::move(n));
}

KernelExpr KernelExpr::sum(double c1, KernelExpr a, double c2, KernelExpr b) {
    if (a.op() == Op::Scaled || b.op() == Op::Scaled)
        throw std::invalid_argument("KernelExpr::sum: operands carry their own coefficient");
    auto n = std::make_shared<Node>();
    n->op = Op::Sum;
    n->coef = {c1, c2};
    n->children = {std::move(a), std::move(b)};
    return KernelExpr(std::move(n));
}

KernelExpr KernelExpr::product(double c, KernelExpr a, KernelExpr b) {
    if (a.op() == Op::Scaled || b.op() == Op::Scaled)
        throw std::invalid_argument("KernelExpr::product: operands carry their own coefficient");
    auto n = std::make_shared<Node>();
    n->op = Op::Product;
    n->coef = {c};
    n->children = {std::move(a), std::move(b)};
    return KernelExpr(std::move(n));
}

double KernelExpr::eval(std::span<const double> x, std::span<const double> xp) const {
    switch (op()) {
        case Op::Leaf: return base().eval(x, xp);
        case Op::Scaled: return coef(0) * child().eval(x, xp);
        case Op::Sum: return coef(0) * left().eval(x, xp) + coef(1) * right().eval(x, xp);
        case Op::Product: return coef(0) * left().eval(x, xp) * right().eval(x, xp);
    }
    return 0.0;
}

Eigen::ArrayXXd KernelExpr::eval_sq(const Eigen::ArrayXXd& d2, const Eigen::ArrayXXd& inner) const {
    switch (op()) {
        case Op::Leaf: {
            const BaseKernel& b = base();
            if (b.kind == BaseKind::DOT) return inner;
            return d2.unaryExpr([&b](double v) { return b.eval_sq(v, 0.0); });
        }
        case Op::Scaled: return coef(0) * child().eval_sq(d2, inner);
        case Op::Sum: return coef(0) * left().eval_sq(d2, inner) + coef(1) * right().eval_sq(d2, inner);
        case Op::Product: return coef(0) * left().eval_sq(d2, inner) * right().eval_sq(d2, inner);
    }
    return {};
}

std::size_t KernelExpr::leaf_count() const {
    if (op() == Op::Leaf) return 1;
    std::size_t n = 0;
    for (const auto& c : node_->children) n += c.leaf_count();
    return n;
}

std::size_t KernelExpr::param_count() const {
    std::size_t n = op() == Op::Leaf ? base().shape.size() : node_->coef.size();
    for (const auto& c : node_->children) n += c.param_count();
    return n;
}

std::string KernelExpr::to_string() const {
    switch (op()) {
        case Op::Leaf: {
            const KindInfo& ki = info(base().kind);
            std::string s(ki.name);
            if (ki.count == 0) return s;
            s += '[';
            for (std::size_t i = 0; i < ki.count; ++i) {
                if (i) s += ',';
                s += ki.params[i];
                s += '=';
                s += format_number(base().shape[i]);
            }
            s += ']';
            return s;
        }
        case Op::Scaled: return format_number(coef(0)) + "*" + child().to_string();
        case Op::Sum:
            return "(" + format_number(coef(0)) + "*" + left().to_string() + " + " + format_number(coef(1)) +
                   "*" + right().to_string() + ")";
        case Op::Product:
            return "(" + format_number(coef(0)) + "*" + left().to_string() + " * " + right().to_string() + ")";
    }
    return {};
}

double eval_expr(const KernelExpr& expr, std::span<const double> x, std::span<const double> xp) {
    return expr.eval(x, xp);
}

// ---------------------------------------------------------------------------
// Flatten / unflatten

namespace {

void flatten(const KernelExpr& e, const KernelBounds& b, ParamVector& out) {
    auto coef = [&](double v) { out.push_back({"c", v, b.coef_lower, b.coef_upper, Scale::Log}); };
    switch (e.op()) {
        case KernelExpr::Op::Leaf: {
            const KindInfo& ki = info(e.base().kind);
            for (std::size_t i = 0; i < ki.count; ++i) {
                Param p{std::string(ki.name) + "." + std::string(ki.params[i]), e.base().shape[i],
                        b.shape_lower, b.shape_upper, Scale::Log};
                if (e.base().kind == BaseKind::PER && i == 0) {
                    p.lower = 0.1 * b.period_scale;
                    p.upper = 10.0 * b.period_scale;
                }
                out.push_back(std::move(p));
            }
            return;
        }
        case KernelExpr::Op::Scaled:
            coef(e.coef(0));
            flatten(e.child(), b, out);
            return;
        case KernelExpr::Op::Sum:
            coef(e.coef(0));
            flatten(e.left(), b, out);
            coef(e.coef(1));
            flatten(e.right(), b, out);
            return;
        case KernelExpr::Op::Product:
            coef(e.coef(0));
            flatten(e.left(), b, out);
            flatten(e.right(), b, out);
            return;
    }
}

KernelExpr rebuild(const KernelExpr& e, std::span<const double> v, std::size_t& pos) {
    auto take = [&]() { return v[pos++]; };
    switch (e.op()) {
        case KernelExpr::Op::Leaf: {
            BaseKernel b = e.base();
            for (auto& s : b.shape) s = take();
            return KernelExpr::leaf(std::move(b));
        }
        case KernelExpr::Op::Scaled: {
            const double c = take();
            return KernelExpr::scaled(c, rebuild(e.child(), v, pos));
        }
        case KernelExpr::Op::Sum: {
            const double c1 = take();
            KernelExpr a = rebuild(e.left(), v, pos);
            const double c2 = take();
            return KernelExpr::sum(c1, std::move(a), c2, rebuild(e.right(), v, pos));
        }
        case KernelExpr::Op::Product: {
            const double c = take();
            KernelExpr a = rebuild(e.left(), v, pos);
            return KernelExpr::product(c, std::move(a), rebuild(e.right(), v, pos));
        }
    }
    return e;
}

}  // namespace

ParamVector param_vector(const KernelExpr& expr, const KernelBounds& bounds) {
    ParamVector out;
    flatten(expr, bounds, out);
    return out;
}

KernelExpr with_params(const KernelExpr& expr, std::span<const double> values) {
    if (values.size() != expr.param_count())
        throw std::invalid_argument("with_params: expected " + std::to_string(expr.param_count()) +
                                    " values, got " + std::to_string(values.size()));
    std::size_t pos = 0;
    return rebuild(expr, values, pos);
}

KernelExpr with_params(const KernelExpr& expr, const ParamVector& params) {
    const auto v = params.values();
    return with_params(expr, std::span<const double>(v));
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    KernelExpr root() {
        skip();
        KernelExpr e = peek() == '(' ? paren() : (std::isdigit(static_cast<unsigned char>(peek())) ||
                                                  peek() == '.' || peek() == '-')
                                                     ? scaled_root()
                                                     : leaf();
        skip();
        if (pos_ != s_.size()) fail("trailing characters");
        return e;
    }

private:
    KernelExpr scaled_root() {
        const double c = number();
        expect('*');
        return KernelExpr::scaled(c, atom());
    }

    KernelExpr atom() {
        skip();
        return peek() == '(' ? paren() : leaf();
    }

    KernelExpr paren() {
        expect('(');
        const double c1 = number();
        expect('*');
        KernelExpr a = atom();
        skip();
        const char op = peek();
        KernelExpr out = a;
        if (op == '+') {
            ++pos_;
            const double c2 = number();
            expect('*');
            out = KernelExpr::sum(c1, std::move(a), c2, atom());
        } else if (op == '*') {
            ++pos_;
            out = KernelExpr::product(c1, std::move(a), atom());
        } else {
            fail("expected '+' or '*'");
        }
        expect(')');
        return out;
    }

    KernelExpr leaf() {
        skip();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        const std::string_view name = s_.substr(start, pos_ - start);
        const KindInfo* ki = nullptr;
        for (const auto& k : kKinds)
            if (k.name == name) ki = &k;
        if (!ki) fail("unknown base kernel '" + std::string(name) + "'");
        BaseKernel b = BaseKernel::make(ki->kind);
        if (ki->count == 0) return KernelExpr::leaf(std::move(b));
        expect('[');
        for (std::size_t i = 0; i < ki->count; ++i) {
            if (i) expect(',');
            skip();
            const std::size_t ks = pos_;
            while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (s_.substr(ks, pos_ - ks) != ki->params[i])
                fail("expected parameter '" + std::string(ki->params[i]) + "'");
            expect('=');
            b.shape[i] = number();
        }
        expect(']');
        return KernelExpr::leaf(std::move(b));
    }

    double number() {
        skip();
        double v = 0.0;
        auto [end, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (ec != std::errc()) fail("expected number");
        pos_ = static_cast<std::size_t>(end - s_.data());
        return v;
    }

    void expect(char c) {
        skip();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    [[noreturn]] void fail(const std::string& why) const {
        throw std::invalid_argument("kernel expression: " + why + " at offset " + std::to_string(pos_));
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

KernelExpr parse_kernel_expr(std::string_view text) { return Parser(text).root(); }

// ---------------------------------------------------------------------------
// KernelFn adapter

void pair_stats(const PointMatrix& X, Eigen::ArrayXXd& d2, Eigen::ArrayXXd& inner) {
    const auto& k = simd::active();
    const Eigen::Index n = X.rows();
    const std::size_t D = static_cast<std::size_t>(X.cols());
    d2.resize(n, n);
    inner.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double* xj = X.data() + j * X.cols();
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double* xi = X.data() + i * X.cols();
            d2(i, j) = d2(j, i) = k.sq_distance(xi, xj, D);
            inner(i, j) = inner(j, i) = k.dot(xi, xj, D);
        }
    }
}

void pair_stats(const PointMatrix& Xq, const PointMatrix& X, Eigen::ArrayXXd& d2, Eigen::ArrayXXd& inner) {
    if (Xq.cols() != X.cols()) throw std::invalid_argument("pair_stats: dimension mismatch");
    const auto& k = simd::active();
    const std::size_t D = static_cast<std::size_t>(X.cols());
    d2.resize(Xq.rows(), X.rows());
    inner.resize(Xq.rows(), X.rows());
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
        const double* xj = X.data() + j * X.cols();
        for (Eigen::Index i = 0; i < Xq.rows(); ++i) {
            const double* xi = Xq.data() + i * Xq.cols();
            d2(i, j) = k.sq_distance(xi, xj, D);
            inner(i, j) = k.dot(xi, xj, D);
        }
    }
}

double median_pairwise_distance(const PointMatrix& X) {
    const auto& k = simd::active();
    std::vector<double> d;
    const Eigen::Index n = std::min<Eigen::Index>(X.rows(), 500);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            d.push_back(std::sqrt(k.sq_distance(X.data() + i * X.cols(), X.data() + j * X.cols(),
                                                static_cast<std::size_t>(X.cols()))));
    if (d.empty()) return 1.0;
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid > 0.0 ? *mid : 1.0;
}

double ExprKernel::eval(std::span<const double> x, std::span<const double> xp, const ParamVector& params) const {
    return with_params(structure_, params).eval(x, xp);
}

std::string ExprKernel::describe(const ParamVector& params) const {
    return with_params(structure_, params).to_string();
}

Matrix ExprKernel::gram(const PointMatrix& X, const ParamVector& params) const {
    Eigen::ArrayXXd d2, inner;
    pair_stats(X, d2, inner);
    return with_params(structure_, params).eval_sq(d2, inner).matrix();
}

Matrix ExprKernel::cross(const PointMatrix& Xq, const PointMatrix& X, const ParamVector& params) const {
    Eigen::ArrayXXd d2, inner;
    pair_stats(Xq, X, d2, inner);
    return with_params(structure_, params).eval_sq(d2, inner).matrix();
}

}  // namespace qgpr
