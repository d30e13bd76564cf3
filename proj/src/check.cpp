#include "torusflow/check.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "torusflow/flow.hpp"
#include "torusflow/maps.hpp"
#include "torusflow/moment.hpp"
#include "torusflow/symbol.hpp"

namespace torusflow {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

template <typename F>
ScalarField fill_field(const TorusGrid& g, F fn) {
    ScalarField out(g);
    const std::size_t count = g.point_count();
    for (std::size_t i = 0; i < count; i++) {
        double x[4] = {0, 0, 0, 0};
        std::size_t r = i;
        for (int a = g.dim - 1; a >= 0; a--) {
            x[a] = static_cast<double>(r % static_cast<std::size_t>(g.n)) / g.n;
            r /= static_cast<std::size_t>(g.n);
        }
        out[i] = fn(x);
    }
    return out;
}

KForm random_kform(const TorusGrid& g, int degree, int kmax, Rng& rng) {
    KForm a(g, degree);
    for (int i = 0; i < a.component_count(); i++)
        a.comp(i) = random_band_limited(g, kmax, 1.0, rng);
    return a;
}

double rel(double err, double scale) { return err / std::max(scale, 1e-300); }

struct Collector {
    std::vector<CheckResult> results;
    void add(const std::string& name, double measured, double threshold) {
        results.push_back({name, measured, threshold, measured <= threshold});
    }
};

void check_grid(Collector& c) {
    TorusGrid g = make_grid(2, 16);
    ScalarField f = fill_field(g, [](const double* x) {
        return std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * 2.0 * x[1]);
    });
    ScalarField want = fill_field(g, [](const double* x) {
        return kTwoPi * std::cos(kTwoPi * x[0]) * std::cos(kTwoPi * 2.0 * x[1]);
    });
    c.add("grid.spectral_derivative.trig", max_abs(spectral_derivative(f, 0) - want) / kTwoPi,
          1e-13);

    ScalarField sq = f;
    for (std::size_t i = 0; i < sq.size(); i++) sq.data()[i] *= f.data()[i];
    c.add("grid.integrate.product", std::abs(integrate(sq) - 0.25), 1e-14);

    Rng rng(101);
    ScalarField r = random_band_limited(g, 5, 1.0, rng);
    ScalarField back = from_spectrum(to_spectrum(r));
    c.add("grid.transform_roundtrip", max_abs(back - r), 1e-13);
}

void check_forms_dim(Collector& c, int dim, int n, const std::string& tag) {
    TorusGrid g = make_grid(dim, n);
    Rng rng(dim == 2 ? 7 : 11);
    int kmax = n / 4;

    double dd = 0.0;
    for (int k = 0; k + 2 <= dim; k++) {
        KForm alpha = random_kform(g, k, kmax, rng);
        KForm dalpha = exterior_derivative(alpha);
        KForm ddalpha = exterior_derivative(dalpha);
        double scale = 0.0;
        for (int i = 0; i < dalpha.component_count(); i++)
            scale = std::max(scale, max_abs(dalpha.comp(i)));
        for (int i = 0; i < ddalpha.component_count(); i++)
            dd = std::max(dd, rel(max_abs(ddalpha.comp(i)), scale));
    }
    c.add("forms.d_squared." + tag, dd, 1e-11);

    KForm beta = random_kform(g, 2, kmax, rng);
    KForm dbeta = codifferential(beta);
    c.add("forms.codiff_squared." + tag,
          rel(max_abs(codifferential(dbeta).comp(0)), max_abs(dbeta.comp(0))), 1e-11);

    double ss = 0.0;
    for (int k = 0; k <= dim; k++) {
        KForm w = random_kform(g, k, kmax, rng);
        double sign = (k * (dim - k)) % 2 == 0 ? 1.0 : -1.0;
        KForm round = hodge_star(hodge_star(w));
        round -= sign * w;
        for (int i = 0; i < round.component_count(); i++)
            ss = std::max(ss, max_abs(round.comp(i)));
    }
    c.add("forms.star_involution." + tag, ss, 0.0);

    c.add("forms.adjointness." + tag, adjointness_defect(g, hodge_star, 23), 1e-12);
}

void check_forms_t4_structure(Collector& c, int n) {
    TorusGrid g = make_grid(4, n);

    // star table on the constant 2-form basis
    double table_err = 0.0;
    const auto& tuples = index_tuples(4, 2);
    for (std::size_t i = 0; i < tuples.size(); i++) {
        KForm basis(g, 2);
        basis.comp(static_cast<int>(i)) = ScalarField(g, 1.0);
        KForm starred = hodge_star(basis);
        // complementary pair and permutation sign of (i, complement)
        std::array<bool, 4> in{};
        for (int a = 0; a < 2; a++) in[static_cast<std::size_t>(tuples[i][static_cast<std::size_t>(a)])] = true;
        int comp_idx[2], w = 0;
        for (int a = 0; a < 4; a++)
            if (!in[static_cast<std::size_t>(a)]) comp_idx[w++] = a;
        int perm[4] = {tuples[i][0], tuples[i][1], comp_idx[0], comp_idx[1]};
        int inversions = 0;
        for (int a = 0; a < 4; a++)
            for (int b = a + 1; b < 4; b++)
                if (perm[a] > perm[b]) inversions++;
        double sign = inversions % 2 == 0 ? 1.0 : -1.0;
        KForm want(g, 2);
        want.comp(tuple_position(4, 2, std::span<const int>(comp_idx, 2))) =
            ScalarField(g, sign);
        starred -= want;
        for (int j = 0; j < starred.component_count(); j++)
            table_err = std::max(table_err, max_abs(starred.comp(j)));
    }
    c.add("forms.star_table.t4", table_err, 0.0);

    auto triple = anti_self_dual_triple(g);
    double asd_err = 0.0, orth_err = 0.0;
    for (int i = 0; i < 3; i++) {
        KForm s = hodge_star(triple[static_cast<std::size_t>(i)]);
        s += triple[static_cast<std::size_t>(i)];
        for (int j = 0; j < s.component_count(); j++)
            asd_err = std::max(asd_err, max_abs(s.comp(j)));
        for (int j = 0; j < 3; j++) {
            double want = i == j ? 2.0 : 0.0;
            orth_err = std::max(
                orth_err, std::abs(l2_inner(triple[static_cast<std::size_t>(i)],
                                            triple[static_cast<std::size_t>(j)]) -
                                   want));
        }
    }
    c.add("forms.asd_triple_antiselfdual.t4", asd_err, 0.0);
    c.add("forms.asd_triple_orthogonality.t4", orth_err, 0.0);

    Rng rng(31);
    KForm beta = random_kform(g, 2, n / 4, rng);
    KForm plus = self_dual_part(beta);
    KForm minus = anti_self_dual_part(beta);
    KForm sum = plus + minus;
    sum -= beta;
    double split_err = 0.0;
    for (int j = 0; j < sum.component_count(); j++)
        split_err = std::max(split_err, max_abs(sum.comp(j)));
    c.add("forms.sd_split_recomposition.t4", rel(split_err, max_abs(beta.comp(0))), 1e-14);
    c.add("forms.sd_split_orthogonality.t4",
          rel(std::abs(l2_inner(plus, minus)), l2_inner(beta, beta)), 1e-13);
}

void check_maps_fast(Collector& c) {
    TorusGrid g = make_grid(2, 16);
    c.add("maps.identity_density", max_abs(map_density(identity_map(g)) - ScalarField(g, 1.0)),
          0.0);

    TorusMap f = random_initial_map(g, 0.05, 5);
    TorusMap finv = inverse_map(f);
    TorusMap round = compose(f, finv);
    double err = 0.0;
    for (int a = 0; a < 2; a++) err = std::max(err, max_abs(round.displacement()[a]));
    c.add("maps.inverse_roundtrip.t2", err, 1e-8);
}

void check_moment_fast(Collector& c) {
    TorusGrid g2 = make_grid(2, 16);
    c.add("moment.zero_at_identity.t2", max_abs(moment_t2(identity_map(g2)).mu), 1e-14);
    c.add("moment.energy_zero_at_identity.t2", energy(identity_map(g2)), 1e-14);

    TorusMap shear = shear_symplectomorphism(make_grid(2, 32), 0.03, 17);
    c.add("moment.shear_on_zero_set.t2", max_abs(moment_t2(shear).mu), 1e-9);

    VectorField r2 = grad_energy(identity_map(g2));
    double g2err = 0.0;
    for (int a = 0; a < 2; a++) g2err = std::max(g2err, max_abs(r2[a]));
    c.add("moment.gradient_zero_at_identity.t2", g2err, 1e-13);

    TorusGrid g4 = make_grid(4, 8);
    auto mu = moment_hk(identity_map(g4));
    double m4 = 0.0;
    for (const auto& m : mu) m4 = std::max(m4, max_abs(m));
    c.add("moment.zero_at_identity.t4", m4, 1e-13);
    c.add("moment.energy_zero_at_identity.t4", energy(identity_map(g4)), 1e-14);

    VectorField r4 = grad_energy(identity_map(g4));
    double g4err = 0.0;
    for (int a = 0; a < 4; a++) g4err = std::max(g4err, max_abs(r4[a]));
    c.add("moment.gradient_zero_at_identity.t4", g4err, 1e-13);
}

void check_symbol_fast(Collector& c) {
    Rng rng(41);
    double det2 = 0.0, det4 = 0.0, neg2 = 0.0, neg4 = 0.0;
    for (int trial = 0; trial < 1000; trial++) {
        double coeff = 0.1 + 9.9 * rng.uniform();
        std::array<double, 2> xi2{};
        std::array<double, 4> xi4{};
        double n2 = 0.0, n4 = 0.0;
        for (auto& v : xi2) v = 6.0 * rng.uniform() - 3.0;
        for (auto& v : xi4) v = 6.0 * rng.uniform() - 3.0;
        for (double v : xi2) n2 += v * v;
        for (double v : xi4) n4 += v * v;
        if (n2 < 1e-4 || n4 < 1e-4) continue;

        SymbolMatrix s2 = symbol_t2(coeff, xi2);
        double want2 = coeff * n2 * n2;
        det2 = std::max(det2, std::abs(symbol_det(s2) - want2) / want2);
        neg2 = std::max(neg2, -symbol_min_eigenvalue(s2));

        SymbolMatrix s4 = symbol_t4(coeff, xi4);
        double h = coeff / 2.0;
        double want4 = h * h * h * n4 * n4 * n4 * n4;
        det4 = std::max(det4, std::abs(symbol_det(s4) - want4) / want4);
        neg4 = std::max(neg4, -symbol_min_eigenvalue(s4));
    }
    c.add("symbol.det_identity.t2", det2, 1e-13);
    c.add("symbol.det_identity.t4", det4, 1e-12);
    c.add("symbol.positive_definite.t2", std::max(0.0, neg2), 0.0);
    c.add("symbol.positive_definite.t4", std::max(0.0, neg4), 0.0);

    TorusGrid g = make_grid(2, 16);
    double coeff = 4.0;
    std::array<int, 4> k{2, -5, 0, 0};
    SymbolMatrix probed = symbol_probe(
        [&](const KForm& a) { return elliptic_operator_t2(coeff, a); }, g, k, coeff);
    SymbolMatrix closed =
        symbol_t2(coeff, {kTwoPi * k[0], kTwoPi * k[1]});
    double probe_err = 0.0, scale = 0.0;
    for (int i = 0; i < 2; i++)
        for (int j = 0; j < 2; j++) {
            probe_err = std::max(probe_err, std::abs(probed.at(i, j) - closed.at(i, j)));
            scale = std::max(scale, std::abs(closed.at(i, j)));
        }
    c.add("symbol.probe_matches_closed_form.t2", rel(probe_err, scale), 1e-12);
}

void check_flow_fast(Collector& c) {
    TorusGrid g = make_grid(2, 16);
    VectorField w_id = deturck_field_t2(identity_map(g));
    double werr = std::max(max_abs(w_id[0]), max_abs(w_id[1]));
    c.add("flow.gauge_field_zero_at_identity.t2", werr, 1e-13);

    VectorField v_id = modified_velocity(identity_map(g));
    double verr = std::max(max_abs(v_id[0]), max_abs(v_id[1]));
    c.add("flow.velocity_zero_at_identity.t2", verr, 1e-13);

    TorusMap f = random_initial_map(g, 0.02, 9, 2);
    VectorField w = deturck_field_t2(f);
    KForm lhs = interior_product(w, standard_area(g));
    KForm iusigma = interior_product(f.displacement(), standard_area(g));
    lhs += exterior_derivative(codifferential(iusigma));
    double defect = 0.0;
    for (int i = 0; i < lhs.component_count(); i++) defect = std::max(defect, max_abs(lhs.comp(i)));
    double wscale = std::max(max_abs(w[0]), max_abs(w[1]));
    c.add("flow.gauge_defining_property.t2", rel(defect, wscale), 1e-10);
}

void check_full(Collector& c) {
    // four-torus inversion pipeline
    TorusGrid g4 = make_grid(4, 16);
    TorusMap f4 = random_initial_map(g4, 0.02, 3, 2);
    TorusMap f4inv = inverse_map(f4);
    TorusMap round = compose(f4, f4inv);
    double err = 0.0;
    for (int a = 0; a < 4; a++) err = std::max(err, max_abs(round.displacement()[a]));
    c.add("maps.inverse_roundtrip.t4", err, 1e-7);

    VectorField v4 = modified_velocity(identity_map(g4));
    double v4err = 0.0;
    for (int a = 0; a < 4; a++) v4err = std::max(v4err, max_abs(v4[a]));
    c.add("flow.velocity_zero_at_identity.t4", v4err, 1e-13);

    // gauge field defining property on the four-torus, with the exact
    // inverse of a generated symplectomorphism
    TorusMap s4 = shear_symplectomorphism(g4, 0.01, 13);
    VectorField w4 = deturck_field_t4(s4);
    KForm omega = standard_symplectic(g4);
    KForm lhs = interior_product(w4, omega);
    TorusMap s4inv = inverse_map(s4);
    KForm iv = interior_product(s4inv.displacement(), omega);
    KForm dh(g4, 0);
    dh.comp(0) = pullback_function(s4, codifferential(iv).comp(0));
    lhs -= exterior_derivative(dh);
    double defect = 0.0;
    for (int i = 0; i < lhs.component_count(); i++)
        defect = std::max(defect, max_abs(lhs.comp(i)));
    double w4scale = 0.0;
    for (int a = 0; a < 4; a++) w4scale = std::max(w4scale, max_abs(w4[a]));
    c.add("flow.gauge_defining_property.t4", rel(defect, w4scale), 1e-5);

    // short dissipation run on the two-torus
    {
        TorusGrid g = make_grid(2, 32);
        FlowOptions opt;
        opt.t_end = 1.0;
        opt.max_steps = 30;
        FlowResult r = run_flow(random_initial_map(g, 0.04, 23), opt);
        double bad = (r.aborted || r.history.size() < 20) ? 1.0 : 0.0;
        double increase = 0.0;
        double min_h = 1.0;
        for (std::size_t i = 1; i < r.history.size(); i++) {
            increase = std::max(increase, r.history[i].phi - r.history[i - 1].phi);
            min_h = std::min(min_h, r.history[i].min_h);
        }
        c.add("flow.dissipation_monotone.t2", bad + std::max(0.0, increase), 1e-12);
        c.add("flow.density_floor.t2", std::max(0.0, 0.5 - min_h), 0.0);
    }

    // gauge reconstruction keeps the density of the gauge family at one
    {
        TorusGrid g = make_grid(2, 32);
        FlowOptions opt;
        opt.t_end = 5e-3;
        opt.dt = 3e-4;
        opt.store_gauge_data = true;
        FlowResult r = run_flow(random_initial_map(g, 0.02, 41, 2), opt);
        double bad = r.aborted ? 1.0 : 0.0;
        std::vector<double> times;
        for (const auto& rec : r.history) times.push_back(rec.t);
        auto gauge = gauge_reconstruct(r.w_samples, times);
        double dens = 0.0;
        for (const auto& m : gauge)
            dens = std::max(dens, max_abs(map_density(m) - ScalarField(g, 1.0)));
        c.add("flow.gauge_family_density.t2", bad + dens, 1e-8);
    }

    // short four-torus IMEX run: energy does not increase
    {
        TorusGrid g = make_grid(4, 8);
        FlowOptions opt;
        opt.t_end = 1.0;
        opt.max_steps = 3;
        opt.integrator = Integrator::Imex;
        FlowResult r = run_flow(random_initial_map(g, 0.01, 29, 1), opt);
        double bad = (r.aborted || r.history.size() < 3) ? 1.0 : 0.0;
        double increase = 0.0;
        for (std::size_t i = 1; i < r.history.size(); i++)
            increase = std::max(increase, r.history[i].phi - r.history[i - 1].phi);
        c.add("flow.dissipation_monotone.t4", bad + std::max(0.0, increase), 1e-12);
    }
}

}  // namespace

double adjointness_defect(const TorusGrid& g,
                          const std::function<KForm(const KForm&)>& star_op, unsigned seed) {
    Rng rng(seed);
    int kmax = g.n / 4;
    double worst = 0.0;
    for (int k = 0; k + 1 <= g.dim; k++) {
        KForm alpha = random_kform(g, k, kmax, rng);
        KForm beta = random_kform(g, k + 1, kmax, rng);
        KForm delta_beta = star_op(exterior_derivative(star_op(beta)));
        delta_beta *= -1.0;
        double lhs = l2_inner(exterior_derivative(alpha), beta);
        double rhs = l2_inner(alpha, delta_beta);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300}));
    }
    return worst;
}

std::vector<CheckResult> run_checks(CheckLevel level) {
    Collector c;
    check_grid(c);
    check_forms_dim(c, 2, 16, "t2");
    check_forms_dim(c, 4, 16, "t4");
    check_forms_t4_structure(c, 16);
    check_maps_fast(c);
    check_moment_fast(c);
    check_symbol_fast(c);
    check_flow_fast(c);
    if (level == CheckLevel::Full) check_full(c);
    return c.results;
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.passed) return false;
    return !results.empty();
}

std::string format_report(const std::vector<CheckResult>& results) {
    std::size_t width = 0;
    for (const auto& r : results) width = std::max(width, r.name.size());
    std::ostringstream out;
    int passed = 0;
    for (const auto& r : results) {
        char line[256];
        std::snprintf(line, sizeof line, "[%s] %-*s  measured %.3e  threshold %.3e\n",
                      r.passed ? "PASS" : "FAIL", static_cast<int>(width), r.name.c_str(),
                      r.measured, r.threshold);
        out << line;
        if (r.passed) passed++;
    }
    out << passed << "/" << results.size() << " checks passed\n";
    return out.str();
}

}  // namespace torusflow
