#include "metriclab/criterion.hpp"

#include "metriclab/heat.hpp"
#include "metriclab/quadrature.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace metriclab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Part of the report format: every diverged verdict carries this caveat.
const char* kSufficiencyCaveat =
    "sufficient condition not met; inconclusive for spectra (the criterion is "
    "sufficient, not necessary)";

double sq(double x) { return x * x; }

bool homogeneous_base(const RadialManifold& man) {
    return man.warp.kind == WarpKind::Euclidean || man.warp.kind == WarpKind::Hyperbolic;
}

}  // namespace

double ConformalProfile::phi(double r) const {
    switch (family) {
        case PhiFamily::Zero: return 0.0;
        case PhiFamily::Constant: return amplitude;
        case PhiFamily::Gaussian: return amplitude * std::exp(-sq(r / width));
        case PhiFamily::Exponential: return amplitude * std::exp(-rate * r);
        case PhiFamily::Compact:
            if (r >= width) return 0.0;
            return amplitude * sq(1.0 - sq(r / width));
        case PhiFamily::Linear: return amplitude * r;
    }
    return 0.0;
}

double ConformalProfile::dphi(double r) const {
    switch (family) {
        case PhiFamily::Zero:
        case PhiFamily::Constant: return 0.0;
        case PhiFamily::Gaussian:
            return amplitude * std::exp(-sq(r / width)) * (-2.0 * r / sq(width));
        case PhiFamily::Exponential: return -rate * amplitude * std::exp(-rate * r);
        case PhiFamily::Compact: {
            if (r >= width) return 0.0;
            const double x = r / width;
            return -4.0 * amplitude * x * (1.0 - sq(x)) / width;
        }
        case PhiFamily::Linear: return amplitude;
    }
    return 0.0;
}

double ConformalProfile::d2phi(double r) const {
    switch (family) {
        case PhiFamily::Zero:
        case PhiFamily::Constant:
        case PhiFamily::Linear: return 0.0;
        case PhiFamily::Gaussian:
            return amplitude * std::exp(-sq(r / width)) *
                   (4.0 * sq(r) / sq(sq(width)) - 2.0 / sq(width));
        case PhiFamily::Exponential: return sq(rate) * amplitude * std::exp(-rate * r);
        case PhiFamily::Compact: {
            if (r >= width) return 0.0;
            const double x = r / width;
            return -4.0 * amplitude * (1.0 - 3.0 * sq(x)) / sq(width);
        }
    }
    return 0.0;
}

double ConformalProfile::deviation(double r) const { return 2.0 * std::sinh(std::abs(phi(r))); }

double ConformalProfile::sup_abs() const {
    if (family == PhiFamily::Linear) return amplitude == 0.0 ? 0.0 : kInf;
    return std::abs(amplitude);
}

bool ConformalProfile::compactly_supported() const {
    return family == PhiFamily::Zero || family == PhiFamily::Compact;
}

double ConformalProfile::support_radius() const {
    if (family == PhiFamily::Zero) return 0.0;
    if (family == PhiFamily::Compact) return width;
    return kInf;
}

std::string ConformalProfile::name() const {
    switch (family) {
        case PhiFamily::Zero: return "zero";
        case PhiFamily::Constant: return "constant";
        case PhiFamily::Gaussian: return "gaussian";
        case PhiFamily::Exponential: return "exponential";
        case PhiFamily::Compact: return "compact";
        case PhiFamily::Linear: return "linear";
    }
    return "unknown";
}

ConformalProfile zero_profile() { return ConformalProfile{}; }

ConformalProfile constant_profile(double amplitude) {
    if (!std::isfinite(amplitude))
        throw std::invalid_argument("constant_profile: amplitude must be finite");
    return ConformalProfile{PhiFamily::Constant, amplitude, 1.0, 1.0};
}

ConformalProfile gaussian_profile(double amplitude, double width) {
    if (!std::isfinite(amplitude) || !(width > 0.0))
        throw std::invalid_argument("gaussian_profile: need finite amplitude and width > 0");
    return ConformalProfile{PhiFamily::Gaussian, amplitude, width, 1.0};
}

ConformalProfile exponential_profile(double amplitude, double rate) {
    if (!std::isfinite(amplitude) || !(rate > 0.0))
        throw std::invalid_argument("exponential_profile: need finite amplitude and rate > 0");
    return ConformalProfile{PhiFamily::Exponential, amplitude, 1.0, rate};
}

ConformalProfile compact_profile(double amplitude, double support) {
    if (!std::isfinite(amplitude) || !(support > 0.0))
        throw std::invalid_argument("compact_profile: need finite amplitude and support > 0");
    return ConformalProfile{PhiFamily::Compact, amplitude, support, 1.0};
}

ConformalProfile linear_profile(double slope) {
    if (!std::isfinite(slope)) throw std::invalid_argument("linear_profile: slope must be finite");
    return ConformalProfile{PhiFamily::Linear, slope, 1.0, 1.0};
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Satisfied: return "satisfied";
        case Verdict::Diverged: return "diverged";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

const char* side_name(MetricSide j) { return j == MetricSide::G ? "g" : "h"; }

namespace {

// T(r) = front * sinh(coeff * |phi(r)|): the deviation uses (2, 1), the flow
// criterion (1, (m/4) S |kappa|).
struct SinhEnvelope {
    double front = 2.0;
    double coeff = 1.0;
};

// Certified multipliers for the x-dependent weight in front of the integrand:
// hi finite feeds tail majorants, lo positive feeds divergence minorants, rep
// is the value actually integrated.
struct WeightModel {
    double rep = 0.0;
    double hi = kInf;
    double lo = 0.0;
    std::string digest;
    std::string caveat;
};

struct TailCertificate {
    bool has_majorant = false;
    double majorant = 0.0;
    bool divergent = false;
    double minorant = 0.0;  // constant below the integrand past r = 1
    std::string description;
};

double truncation_radius(const ConformalProfile& p, const RadialManifold& man) {
    double R;
    switch (p.family) {
        case PhiFamily::Zero: R = 1.0; break;
        case PhiFamily::Gaussian: R = std::max(8.0, 6.0 * p.width); break;
        case PhiFamily::Exponential: R = std::max(12.0, 12.0 / p.rate); break;
        case PhiFamily::Compact: R = p.width; break;
        default: R = 12.0; break;  // constant, linear: partial value only
    }
    return std::min(R, domain_radius(man));
}

TailCertificate tail_certificate(const ConformalProfile& p, const RadialManifold& man,
                                 const SinhEnvelope& env, double R, const WeightModel& w,
                                 double extra_hi, double extra_lo) {
    const int m = man.dim;
    const double omega = unit_sphere_area(m);
    TailCertificate out;

    if (std::isfinite(domain_radius(man))) {
        out.has_majorant = true;
        out.description = "compact domain, integral proper";
        return out;
    }
    if (p.compactly_supported() && R >= p.support_radius()) {
        out.has_majorant = true;
        out.description = "compactly supported integrand, zero tail";
        return out;
    }
    const double A = std::abs(p.amplitude);
    if (A == 0.0 || env.coeff == 0.0) {
        out.has_majorant = true;
        out.description = "identically zero integrand";
        return out;
    }

    const bool poly_vol =
        man.warp.kind == WarpKind::Euclidean || man.warp.kind == WarpKind::PolyExp;
    // |phi| is nonincreasing for the decaying families, so past R the convex
    // sinh is dominated by the chord slope at |phi(R)|.
    const double slope = env.coeff * std::cosh(env.coeff * std::abs(p.phi(R)));
    const double vol_mult = poly_vol ? std::pow(man.warp_over_r_sup(), m - 1)
                                     : std::pow(0.5, m - 1);

    auto majorant_from = [&](double family_tail, const char* what) {
        if (!std::isfinite(w.hi) || !std::isfinite(extra_hi)) return false;
        out.has_majorant = true;
        out.majorant = env.front * slope * w.hi * extra_hi * omega * vol_mult * family_tail;
        out.description = what;
        return true;
    };
    auto divergence = [&](double geometric_floor, const char* what) {
        if (!(w.lo > 0.0) || !(extra_lo > 0.0) || !(geometric_floor > 0.0)) return false;
        out.divergent = true;
        out.minorant = geometric_floor * w.lo * extra_lo;
        std::ostringstream os;
        os << what << "; integrand >= " << out.minorant << " for r >= 1";
        out.description = os.str();
        return true;
    };
    // Volume density floor at r = 1 that is nondecreasing past it.
    const double vol_floor = poly_vol ? std::pow(man.warp_over_r_inf(), m - 1)
                                      : std::pow(std::sinh(1.0), m - 1);

    switch (p.family) {
        case PhiFamily::Gaussian:
            if (poly_vol) {
                if (majorant_from(A * poly_gauss_tail_bound(m - 1, p.width, R),
                                  "gaussian decay against polynomial volume"))
                    return out;
            } else {
                if (majorant_from(A * exp_gauss_tail(m - 1, p.width, R),
                                  "gaussian decay against exponential volume"))
                    return out;
            }
            break;
        case PhiFamily::Exponential:
            if (poly_vol) {
                if (majorant_from(A * poly_exp_tail_bound(m - 1, p.rate, R),
                                  "exponential decay against polynomial volume"))
                    return out;
            } else if (p.rate > double(m - 1)) {
                const double gap = p.rate - double(m - 1);
                if (majorant_from(A * std::exp(-gap * R) / gap,
                                  "exponential decay dominating exponential volume"))
                    return out;
            } else {
                // sinh(ct) >= ct and sinh(r)^{m-1} >= sinh(1)^{m-1} e^{(m-1)(r-1)},
                // so the decay rate never beats the volume growth.
                if (divergence(env.front * env.coeff * A * std::exp(-p.rate) * omega * vol_floor,
                               "decay rate at or below the volume growth rate"))
                    return out;
            }
            break;
        case PhiFamily::Constant:
        case PhiFamily::Linear:
            // |phi(r)| >= |phi(1)| past r = 1 while the volume keeps growing.
            if (divergence(env.front * std::sinh(env.coeff * std::abs(p.phi(1.0))) * omega *
                               vol_floor,
                           "nondecaying deviation on an infinite-volume base"))
                return out;
            break;
        default: break;
    }
    out.description = "no certified tail model";
    return out;
}

CriterionReport trivial_zero_report(const std::string& id, const std::string& digest) {
    CriterionReport rep;
    rep.criterion_id = id;
    rep.tail_model = "identically zero integrand";
    rep.verdict = Verdict::Satisfied;
    rep.inputs_digest = digest;
    return rep;
}

CriterionReport assemble(const std::string& id, const ConformalProfile& p,
                         const RadialManifold& man, const SinhEnvelope& env,
                         const WeightModel& w, const std::function<double(double)>& extra,
                         double extra_hi, double extra_lo, const std::string& delta_digest) {
    CriterionReport rep;
    rep.criterion_id = id;
    const double R = truncation_radius(p, man);
    rep.truncation_radius = R;
    const double omega = unit_sphere_area(man.dim);
    auto integrand = [&](double r) {
        return w.rep * env.front * std::sinh(env.coeff * std::abs(p.phi(r))) * omega *
               volume_measure_weight(man, r) * extra(r);
    };
    // Scale the absolute tolerance to the integrand size so large-mass
    // integrands (exponential volume out to R) stay at ~1e-12 relative.
    double probe = 0.0;
    for (int i = 0; i <= 64; ++i) probe = std::max(probe, std::abs(integrand(R * i / 64.0)));
    const double tol = 1e-12 * std::max(1.0, probe * R);
    const double split = 0.25 * R;
    rep.value = integrate(integrand, 0.0, split, tol) + integrate(integrand, split, R, tol);

    const TailCertificate tc = tail_certificate(p, man, env, R, w, extra_hi, extra_lo);
    rep.tail_model = tc.description;
    rep.inputs_digest = delta_digest + ";" + w.digest;
    std::string cav = w.caveat;
    if (tc.has_majorant) {
        rep.truncation_error = tc.majorant;
        rep.verdict = Verdict::Satisfied;
    } else if (tc.divergent) {
        rep.infinite = true;
        rep.verdict = Verdict::Diverged;
        if (!cav.empty()) cav += "; ";
        cav += kSufficiencyCaveat;
    } else {
        rep.verdict = Verdict::Inconclusive;
    }
    rep.caveat = cav;
    return rep;
}

// Exact pole-centered volume of the unit ball of h = e^{2u} g, u = -(2/m) phi:
// radial curves are h-geodesics by symmetry, so the ball radius solves
// int_0^r e^u = 1 and the volume integrates e^{mu} against the g-measure.
double perturbed_unit_ball_pole(const ConformalPair& pair) {
    const RadialManifold& man = pair.base;
    const int m = man.dim;
    const ConformalProfile& p = pair.profile;
    auto uexp = [&](double r) { return std::exp(-2.0 * p.phi(r) / m); };
    auto hlen = [&](double r) { return integrate(uexp, 0.0, r, 1e-13); };
    double hi = 1.0;
    const double dom = domain_radius(man);
    if (std::isfinite(dom)) {
        if (!(hlen(dom) > 1.0))
            throw std::invalid_argument(
                "corollary_lower_integral: the perturbed unit ball leaves the truncated domain");
        hi = dom;
    } else {
        while (hlen(hi) < 1.0) {
            hi *= 2.0;
            if (hi > 4096.0)
                throw std::runtime_error("corollary_lower_integral: unit-ball bracket failed");
        }
    }
    double lo = 0.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (hlen(mid) < 1.0 ? lo : hi) = mid;
    }
    const double rstar = 0.5 * (lo + hi);
    return unit_sphere_area(m) *
           integrate(
               [&](double r) { return std::pow(uexp(r), m) * volume_measure_weight(man, r); },
               0.0, rstar, 1e-13);
}

std::function<double(double)> side_density(const ConformalProfile& p, MetricSide j) {
    if (j == MetricSide::H)
        return [&p](double r) { return std::exp(-2.0 * p.phi(r)); };
    return [](double) { return 1.0; };
}

}  // namespace

CriterionReport theorem_main_integral(const ConformalPair& pair, double s, MetricSide j) {
    const RadialManifold& man = pair.base;
    const ConformalProfile& p = pair.profile;
    const int m = man.dim;
    if (!(s > 0.0) || !std::isfinite(s))
        throw std::invalid_argument("theorem_main_integral: need finite s > 0");
    const std::string id = std::string("theorem-main-") + side_name(j);
    if (p.family == PhiFamily::Zero || p.amplitude == 0.0)
        return trivial_zero_report(id, "delta=zero");

    WeightModel w;
    std::ostringstream dg;
    if (j == MetricSide::G) {
        const LocalBounds lb = local_bounds(man, 0.0);
        const double rate = lb.rate_at(s);
        double sup;
        Provenance sup_prov;
        if (has_closed_kernel(man)) {
            const KernelSup ks = kernel_sup(man, s);
            sup = ks.value;
            sup_prov = ks.provenance;
        } else {
            double ca, cb;
            volume_upper_defaults(m, &ca, &cb);
            const double rad = std::min(std::sqrt(s), 1.0);
            sup = volume_upper_bound(m, -lb.ricci_neg, ball_volume(man, rad), ca, cb);
            sup_prov = Provenance::Configured;
        }
        w.rep = rate * sup;
        dg << "rate=" << provenance_name(lb.provenance)
           << ";sup=" << provenance_name(sup_prov) << ";measure=exact-radial";
        w.digest = dg.str();
        if (homogeneous_base(man)) {
            w.hi = w.rep;
            if (sup_prov == Provenance::ClosedForm) w.lo = w.rep;
        } else {
            w.caveat = "pole-centered rate and kernel bounds applied off-pole";
        }
    } else {
        if (!std::isfinite(p.sup_abs()))
            throw std::invalid_argument(
                "theorem_main_integral: unbounded conformal factor on the perturbed side, "
                "rate and kernel provenance missing");
        if (p.family == PhiFamily::Constant && homogeneous_base(man)) {
            // h = c2 g is again a homogeneous model; closed forms transport by
            // scaling: lap_h = lap_g / c2 and p^h_s(x,x) = c2^{-m/2} p^g_{s/c2}(x,x).
            const double c2 = std::exp(-4.0 * p.amplitude / m);
            const double ric_h =
                man.warp.kind == WarpKind::Hyperbolic ? -double(m - 1) / c2 : 0.0;
            const LocalBounds lb = local_bounds_from_ricci(m, ric_h);
            const double rate = lb.rate_at(s);
            double sup;
            Provenance sup_prov;
            if (has_closed_kernel(man)) {
                sup = std::pow(c2, -0.5 * m) * closed_kernel(man, s / c2, 0.0);
                sup_prov = Provenance::ClosedForm;
            } else {
                double ca, cb;
                volume_upper_defaults(m, &ca, &cb);
                const double rad = std::min(std::sqrt(s), 1.0) / std::sqrt(c2);
                sup = volume_upper_bound(m, std::min(ric_h, 0.0),
                                         std::pow(c2, 0.5 * m) * ball_volume(man, rad), ca, cb);
                sup_prov = Provenance::Configured;
            }
            w.rep = rate * sup;
            w.hi = w.rep;
            if (sup_prov == Provenance::ClosedForm) w.lo = w.rep;
            dg << "rate=closed-form;sup=" << provenance_name(sup_prov)
               << ";measure=exact-radial;route=scaled-model";
            w.digest = dg.str();
        } else if (m == 2 && man.warp.kind != WarpKind::PolyExp) {
            // 2-d conformal curvature K_h = e^{2 phi}(K_g + lap_g phi), sampled
            // on a grid with a monotone-envelope tail stitch.
            const double Rgrid =
                std::min(std::max(2.0 * truncation_radius(p, man), 16.0), domain_radius(man));
            const double step = 1e-3;
            double kmin = kInf;
            const int nsteps = static_cast<int>((Rgrid - 1e-6) / step) + 1;
            for (int i = 0; i <= nsteps; ++i) {
                const double r = std::min(1e-6 + i * step, Rgrid);
                const double kg = ricci_quadratic_form(man, r).radial;
                const double lap =
                    p.d2phi(r) + (man.warp.d1(r) / man.warp.value(r)) * p.dphi(r);
                kmin = std::min(kmin, std::exp(2.0 * p.phi(r)) * (kg + lap));
            }
            if (!std::isfinite(domain_radius(man))) {
                // Past the grid |phi|, |phi'|, |phi''| are nonincreasing and so is
                // f'/f, giving a certified floor under the conformal curvature.
                const double phiR = std::abs(p.phi(Rgrid));
                const double ff = std::abs(man.warp.d1(Rgrid) / man.warp.value(Rgrid));
                const double lapR = std::abs(p.d2phi(Rgrid)) + ff * std::abs(p.dphi(Rgrid));
                const double kg = ricci_quadratic_form(man, Rgrid).radial;
                kmin = std::min(kmin, kg - std::expm1(2.0 * phiR) * std::abs(kg) -
                                          std::exp(2.0 * phiR) * lapR);
            }
            const LocalBounds lb = local_bounds_from_ricci(2, kmin);
            const double rate = lb.rate_at(s);
            // Kernel bound through the conformal ball sandwich: an h-ball of
            // radius t contains the g-ball of radius t e^{-sup u} and the
            // h-density is at least e^{m inf u}.
            const double u_lo = -2.0 * std::max(p.amplitude, 0.0) / m;
            const double u_hi = -2.0 * std::min(p.amplitude, 0.0) / m;
            const double rad = std::min(std::sqrt(s), 1.0) * std::exp(-u_hi);
            if (rad > domain_radius(man))
                throw std::invalid_argument(
                    "theorem_main_integral: comparison ball leaves the domain");
            const double ball_lo = std::exp(m * u_lo) * ball_volume(man, rad);
            double ca, cb;
            volume_upper_defaults(m, &ca, &cb);
            const double sup = volume_upper_bound(m, std::min(kmin, 0.0), ball_lo, ca, cb);
            w.rep = rate * sup;
            w.hi = w.rep;
            dg << "rate=sampled-infimum;sup=configured;measure=exact-radial;route=conformal-2d";
            w.digest = dg.str();
            if (man.warp.kind == WarpKind::SphereCap) {
                // Cap balls shrink near the rim, so the pole sandwich is not
                // uniform; the compact domain still decides the verdict.
                w.hi = kInf;
                w.caveat = "pole-centered comparison ball on the truncated cap";
            }
        } else {
            throw std::invalid_argument(
                "theorem_main_integral: no rate/kernel provenance for the perturbed side "
                "(supported: constant factors over homogeneous bases, 2-d non-poly bases)");
        }
    }

    const double eh = (j == MetricSide::H) ? std::exp(2.0 * p.sup_abs()) : 1.0;
    const double el = (j == MetricSide::H) ? std::exp(-2.0 * p.sup_abs()) : 1.0;
    return assemble(id, p, man, SinhEnvelope{2.0, 1.0}, w, side_density(p, j), eh, el,
                    "delta=conformal-family:" + p.name());
}

CriterionReport corollary_lower_integral(const ConformalPair& pair, MetricSide j) {
    const RadialManifold& man = pair.base;
    const ConformalProfile& p = pair.profile;
    const int m = man.dim;
    const std::string id = std::string("corollary-lower-") + side_name(j);
    if (p.family == PhiFamily::Zero || p.amplitude == 0.0)
        return trivial_zero_report(id, "delta=zero");

    WeightModel w;
    if (j == MetricSide::G) {
        w.rep = 1.0 / ball_volume(man, 1.0);
        if (homogeneous_base(man)) {
            w.hi = w.rep;
            w.lo = w.rep;
            w.digest = "ball=closed-homogeneous;measure=exact-radial";
        } else {
            w.digest = "ball=pole-centered;measure=exact-radial";
            w.caveat = "pole-centered unit-ball volume applied off-pole";
        }
    } else {
        if (!std::isfinite(p.sup_abs()))
            throw std::invalid_argument(
                "corollary_lower_integral: unbounded conformal factor, no certified "
                "unit-ball weight");
        w.rep = 1.0 / perturbed_unit_ball_pole(pair);
        if (homogeneous_base(man)) {
            const double u_lo = -2.0 * std::max(p.amplitude, 0.0) / m;
            const double u_hi = -2.0 * std::min(p.amplitude, 0.0) / m;
            const double ball_lo = std::exp(m * u_lo) * ball_volume(man, std::exp(-u_hi));
            const double ball_hi = std::exp(m * u_hi) * ball_volume(man, std::exp(-u_lo));
            w.hi = 1.0 / ball_lo;
            w.lo = 1.0 / ball_hi;
            w.digest = "ball=pole-exact+conformal-sandwich;measure=exact-radial";
            w.caveat =
                "pole-centered perturbed unit ball; off-pole weight inside the certified "
                "sandwich";
        } else {
            w.digest = "ball=pole-centered-perturbed;measure=exact-radial";
            w.caveat = "pole-centered perturbed unit-ball volume applied off-pole";
        }
    }
    const double eh = (j == MetricSide::H) ? std::exp(2.0 * p.sup_abs()) : 1.0;
    const double el = (j == MetricSide::H) ? std::exp(-2.0 * p.sup_abs()) : 1.0;
    return assemble(id, p, man, SinhEnvelope{2.0, 1.0}, w, side_density(p, j), eh, el,
                    "delta=conformal-family:" + p.name());
}

TransferReport quasi_isometry_transfer_check(const ConformalPair& pair) {
    TransferReport t;
    if (!std::isfinite(pair.profile.sup_abs())) {
        t.notice =
            "quasi-isometry certificate absent (unbounded conformal factor); check skipped";
        t.side_g.criterion_id = "corollary-lower-g";
        t.side_h.criterion_id = "corollary-lower-h";
        t.side_g.caveat = t.side_h.caveat = t.notice;
        return t;
    }
    t.certified = true;
    t.side_g = corollary_lower_integral(pair, MetricSide::G);
    t.side_h = corollary_lower_integral(pair, MetricSide::H);
    t.agree = t.side_g.verdict == t.side_h.verdict;
    return t;
}

CriterionReport flow_integral(const FlowCriterionInput& in) {
    const RadialManifold& man = in.base;
    const int m = man.dim;
    const ConformalProfile& A = in.a_field;
    if (!in.sup_certified || !std::isfinite(in.sup_a))
        throw std::invalid_argument("flow_integral: sup A not certified");
    if (A.amplitude < 0.0)
        throw std::invalid_argument("flow_integral: the curvature envelope must be nonnegative");
    if (!std::isfinite(A.sup_abs()) || A.sup_abs() > in.sup_a + 1e-9)
        throw std::invalid_argument("flow_integral: certificate below the actual sup of A");
    if (!(in.horizon > 0.0) || !std::isfinite(in.kappa))
        throw std::invalid_argument("flow_integral: need finite kappa and horizon > 0");

    const std::string id = "corollary-flow";
    const double coeff = 0.25 * m * in.horizon * std::abs(in.kappa);
    if (A.family == PhiFamily::Zero || A.amplitude == 0.0 || coeff == 0.0)
        return trivial_zero_report(id, "a-field=zero-or-static");

    WeightModel w;
    w.rep = 1.0 / ball_volume(man, 1.0);
    if (homogeneous_base(man)) {
        w.hi = w.rep;
        w.lo = w.rep;
        w.digest = "ball=closed-homogeneous;measure=exact-radial";
    } else {
        w.digest = "ball=pole-centered;measure=exact-radial";
        w.caveat = "pole-centered unit-ball volume applied off-pole";
    }
    auto unit = std::function<double(double)>([](double) { return 1.0; });
    return assemble(id, A, man, SinhEnvelope{1.0, coeff}, w, unit, 1.0, 1.0,
                    "a-field=family:" + A.name());
}

}  // namespace metriclab
