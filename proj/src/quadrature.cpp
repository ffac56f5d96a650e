#include "darcy/quadrature.hpp"

#include <cmath>

namespace darcy::quadrature {

Rule1D gauss_legendre(int n) {
    Rule1D rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Tricomi-style initial guess, then Newton on P_n.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

SphereRule sphere_rule(const Vec3& center, double r, int order) {
    Rule1D gl = gauss_legendre(order);
    const int n_phi = 2 * order;
    SphereRule rule;
    rule.points.reserve(static_cast<std::size_t>(order) * n_phi);
    rule.normals.reserve(rule.points.capacity());
    rule.weights.reserve(rule.points.capacity());
    const double dphi = 2.0 * M_PI / n_phi;
    for (int i = 0; i < order; ++i) {
        const double ct = gl.nodes[i];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        const double w = gl.weights[i] * dphi * r * r;
        for (int j = 0; j < n_phi; ++j) {
            const double phi = (j + 0.5) * dphi;
            Vec3 n{st * std::cos(phi), st * std::sin(phi), ct};
            rule.normals.push_back(n);
            rule.points.push_back(center + r * n);
            rule.weights.push_back(w);
        }
    }
    return rule;
}

double sphere_average(const Vec3& center, double r, int order,
                      const std::function<double(const Vec3&)>& f) {
    SphereRule rule = sphere_rule(center, r, order);
    double sum = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < rule.points.size(); ++i) {
        sum += rule.weights[i] * f(rule.points[i]);
        wsum += rule.weights[i];
    }
    return sum / wsum;
}

} // namespace darcy::quadrature
