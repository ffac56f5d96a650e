#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracles {

std::vector<double> brute_force_half_nn(const std::vector<Vec3>& pts) {
    const std::size_t n = pts.size();
    std::vector<double> d(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            d[i] = std::min(d[i], norm(pts[i] - pts[j]));
        }
    for (double& v : d) v *= 0.5;
    return d;
}

std::vector<std::vector<std::uint32_t>> brute_force_components(
    const std::vector<darcy::geometry::Ball>& balls, double dilation) {
    const std::size_t n = balls.size();
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double rr = dilation * (balls[i].radius + balls[j].radius);
            if (norm2(balls[i].center - balls[j].center) <= rr * rr)
                parent[find(static_cast<std::uint32_t>(i))] = find(static_cast<std::uint32_t>(j));
        }
    std::vector<std::vector<std::uint32_t>> comps(n);
    for (std::uint32_t i = 0; i < n; ++i) comps[find(i)].push_back(i);
    std::vector<std::vector<std::uint32_t>> out;
    for (auto& c : comps)
        if (!c.empty()) {
            std::sort(c.begin(), c.end());
            out.push_back(std::move(c));
        }
    std::sort(out.begin(), out.end());
    return out;
}

double radial_bvp_flux(double a, double R, int nodes) {
    const int n = nodes;
    const double h = (R - a) / (n - 1);
    // Interior unknowns w_1..w_{n-2}; w_0 = 0, w_{n-1} = 1.
    std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0), rhs(n, 0.0);
    for (int i = 1; i < n - 1; ++i) {
        const double r = a + i * h;
        const double rm = r - h / 2, rp = r + h / 2;
        lo[i] = rm * rm;
        up[i] = rp * rp;
        di[i] = -(rm * rm + rp * rp);
    }
    rhs[n - 2] -= up[n - 2] * 1.0;
    // Thomas on the interior block.
    for (int i = 2; i < n - 1; ++i) {
        const double m = lo[i] / di[i - 1];
        di[i] -= m * up[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> w(n, 0.0);
    w[n - 1] = 1.0;
    w[n - 2] = rhs[n - 2] / di[n - 2];
    for (int i = n - 3; i >= 1; --i) w[i] = (rhs[i] - up[i] * w[i + 1]) / di[i];
    // Discrete flux through the face r_{1/2} (constant across faces).
    const double rf = a + h / 2;
    return 4.0 * M_PI * rf * rf * (w[1] - w[0]) / h;
}

double unit_cube_poisson_value(double x, double y, double z, double tol) {
    double sum = 0.0;
    const double c = 64.0 / (M_PI * M_PI * M_PI * M_PI * M_PI);
    for (int l = 1; l < 400; l += 2) {
        double inner_l = 0.0;
        for (int m = 1; m < 400; m += 2) {
            double inner_m = 0.0;
            for (int nn = 1; nn < 400; nn += 2) {
                const double term = std::sin(l * M_PI * x) * std::sin(m * M_PI * y) *
                                    std::sin(nn * M_PI * z) /
                                    (static_cast<double>(l) * m * nn *
                                     (static_cast<double>(l) * l + static_cast<double>(m) * m +
                                      static_cast<double>(nn) * nn));
                inner_m += term;
                if (nn > 5 && std::abs(term) < tol / 1000.0) break;
            }
            inner_l += inner_m;
            if (m > 5 && std::abs(inner_m) < tol / 100.0) break;
        }
        sum += inner_l;
        if (l > 5 && std::abs(inner_l) < tol / 10.0) break;
    }
    return c * sum;
}

double rasterized_union_volume(const std::vector<darcy::geometry::Ball>& balls,
                               const darcy::Box& box, int n) {
    const Vec3 ext = box.extent();
    const double hx = ext.x / n, hy = ext.y / n, hz = ext.z / n;
    std::int64_t hits = 0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const Vec3 p{box.lo.x + (i + 0.5) * hx, box.lo.y + (j + 0.5) * hy,
                             box.lo.z + (k + 0.5) * hz};
                for (const auto& b : balls) {
                    if (norm2(p - b.center) <= b.radius * b.radius) {
                        ++hits;
                        break;
                    }
                }
            }
    return static_cast<double>(hits) * hx * hy * hz;
}

namespace {
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, tol / 2, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, tol / 2, depth - 1);
}
} // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    return simpson_rec(f, a, b, f(a), f(0.5 * (a + b)), f(b), tol, 48);
}

double sphere_integral_simpson(const Vec3& c, double r, int n,
                               const std::function<double(const Vec3&)>& f) {
    // Composite Simpson in theta and phi; n must be even.
    if (n % 2) ++n;
    const double dth = M_PI / n, dph = 2.0 * M_PI / n;
    auto wt = [&](int i) { return i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0); };
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double th = i * dth;
        for (int j = 0; j <= n; ++j) {
            const double ph = j * dph;
            const Vec3 p{c.x + r * std::sin(th) * std::cos(ph),
                         c.y + r * std::sin(th) * std::sin(ph), c.z + r * std::cos(th)};
            sum += wt(i) * wt(j) * f(p) * std::sin(th);
        }
    }
    return sum * dth * dph / 9.0 * r * r;
}

darcy::geometry::Ball two_ball_seb(const darcy::geometry::Ball& a,
                                   const darcy::geometry::Ball& b) {
    const double d = norm(b.center - a.center);
    if (d + b.radius <= a.radius) return a;
    if (d + a.radius <= b.radius) return b;
    const double r = 0.5 * (d + a.radius + b.radius);
    darcy::geometry::Ball out;
    out.center = a.center + ((r - a.radius) / d) * (b.center - a.center);
    out.radius = r;
    out.rho = std::max(a.rho, b.rho);
    return out;
}

MeanStd mean_std(const std::vector<double>& v) {
    MeanStd ms;
    if (v.empty()) return ms;
    for (double x : v) ms.mean += x;
    ms.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double s = 0.0;
        for (double x : v) s += (x - ms.mean) * (x - ms.mean);
        ms.sd = std::sqrt(s / (v.size() - 1.0));
        ms.stderr_ = ms.sd / std::sqrt(static_cast<double>(v.size()));
    }
    return ms;
}

} // namespace oracles
