#include "hyptimes/systems.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

#include "hyptimes/errors.hpp"
#include "hyptimes/expr.hpp"
#include "hyptimes/flow.hpp"

namespace hyptimes {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.4142135623730951;

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

// phi(t) = t^4 sin(1/t), extended by 0 at t = 0.
double sinus_phi_prime(double t) {
  if (std::abs(t) < 1e-12) return 0.0;
  const double s = std::sin(1.0 / t);
  const double c = std::cos(1.0 / t);
  return 4.0 * t * t * t * s - t * t * c;
}

double sinus_phi_second(double t) {
  if (std::abs(t) < 1e-12) return 0.0;
  const double s = std::sin(1.0 / t);
  const double c = std::cos(1.0 / t);
  return s * (12.0 * t * t - 1.0) - 6.0 * t * c;
}

// Recenter a circle coordinate of the given period into [-p/2, p/2).
double recenter(double x, double period) {
  return x - period * std::round(x / period);
}

SmoothSystem sinus_ascent_field() {
  const double period = 2.0 / kPi;
  SmoothSystem sys;
  sys.kind = SystemKind::kVectorField;
  sys.dimension = 1;
  sys.topology = ChartTopology::torus({period});
  sys.eval = [period](const Vec& x) {
    return vec1(sinus_phi_prime(recenter(x(0), period)));
  };
  sys.jacobian_fn = [period](const Vec& x) {
    Mat j(1, 1);
    j(0, 0) = sinus_phi_second(recenter(x(0), period));
    return j;
  };
  sys.sample_lo = vec1(0.0);
  sys.sample_hi = vec1(period);
  sys.name = "sinus_ascent_field";
  return sys;
}

// Roots of phi' on the circle by sign-change bisection over a fixed grid.
std::vector<double> sinus_roots() {
  const double period = 2.0 / kPi;
  const int grid = 4096;
  std::vector<double> roots;
  double prev_t = -period / 2.0;
  double prev_v = sinus_phi_prime(prev_t);
  for (int k = 1; k <= grid; ++k) {
    const double t = -period / 2.0 + period * static_cast<double>(k) / grid;
    const double v = sinus_phi_prime(t);
    if ((prev_v < 0.0 && v >= 0.0) || (prev_v > 0.0 && v <= 0.0)) {
      double lo = prev_t, hi = t, f_lo = prev_v;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = sinus_phi_prime(mid);
        if ((f_mid >= 0.0) == (f_lo >= 0.0)) {
          lo = mid;
          f_lo = f_mid;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_t = t;
    prev_v = v;
  }
  roots.push_back(0.0);  // flat equilibrium at the center of the chart
  return roots;
}

}  // namespace

SmoothSystem constant_torus_field(double vx, double vy) {
  SmoothSystem sys;
  sys.kind = SystemKind::kVectorField;
  sys.dimension = 2;
  sys.topology = ChartTopology::torus({2.0 * kPi, 2.0 * kPi});
  Vec v = vec2(vx, vy);
  sys.eval = [v](const Vec&) { return v; };
  sys.jacobian_fn = [](const Vec&) { return Mat(Mat::Zero(2, 2)); };
  sys.jacobian_bound = 0.0;
  sys.sample_lo = vec2(0.0, 0.0);
  sys.sample_hi = vec2(2.0 * kPi, 2.0 * kPi);
  sys.name = "constant_torus";
  sys.params = {{"vx", vx}, {"vy", vy}};
  return sys;
}

SmoothSystem linear_field(const Mat& a) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw InputError("linear_field needs a square matrix");
  SmoothSystem sys;
  sys.kind = SystemKind::kVectorField;
  sys.dimension = static_cast<int>(a.rows());
  sys.topology = ChartTopology::euclidean(sys.dimension);
  Mat m = a;
  sys.eval = [m](const Vec& x) { return Vec(m * x); };
  sys.jacobian_fn = [m](const Vec&) { return m; };
  sys.equilibria = {Vec(Vec::Zero(a.rows()))};
  sys.sample_lo = Vec(-Vec::Ones(a.rows()));
  sys.sample_hi = Vec(Vec::Ones(a.rows()));
  sys.name = "linear_field";
  return sys;
}

SmoothSystem linear_map(const Mat& a) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw InputError("linear_map needs a square matrix");
  SmoothSystem sys;
  sys.kind = SystemKind::kMap;
  sys.dimension = static_cast<int>(a.rows());
  sys.topology = ChartTopology::euclidean(sys.dimension);
  Mat m = a;
  sys.eval = [m](const Vec& x) { return Vec(m * x); };
  sys.jacobian_fn = [m](const Vec&) { return m; };
  Eigen::FullPivLU<Mat> lu(m);
  if (lu.isInvertible()) {
    Mat inv = lu.inverse();
    sys.inverse_eval = [inv](const Vec& x) { return Vec(inv * x); };
  }
  sys.equilibria = {Vec(Vec::Zero(a.rows()))};
  sys.sample_lo = Vec(-Vec::Ones(a.rows()));
  sys.sample_hi = Vec(Vec::Ones(a.rows()));
  sys.name = "linear_map";
  return sys;
}

SmoothSystem limit_cycle_field(bool repelling) {
  SmoothSystem sys;
  sys.kind = SystemKind::kVectorField;
  sys.dimension = 2;
  sys.topology = ChartTopology::euclidean(2);
  const double sign = repelling ? -1.0 : 1.0;
  sys.eval = [sign](const Vec& z) {
    const double x = z(0), y = z(1);
    const double radial = 1.0 - (x * x + y * y);
    return vec2(sign * x * radial - y, sign * y * radial + x);
  };
  sys.jacobian_fn = [sign](const Vec& z) {
    const double x = z(0), y = z(1);
    const double radial = 1.0 - (x * x + y * y);
    Mat j(2, 2);
    j(0, 0) = sign * (radial - 2.0 * x * x);
    j(0, 1) = sign * (-2.0 * x * y) - 1.0;
    j(1, 0) = sign * (-2.0 * x * y) + 1.0;
    j(1, 1) = sign * (radial - 2.0 * y * y);
    return j;
  };
  sys.equilibria = {vec2(0.0, 0.0)};
  sys.sample_lo = vec2(-2.0, -2.0);
  sys.sample_hi = vec2(2.0, 2.0);
  sys.name = repelling ? "limit_cycle_repelling" : "limit_cycle";
  return sys;
}

SmoothSystem north_south_circle_field() {
  SmoothSystem sys;
  sys.kind = SystemKind::kVectorField;
  sys.dimension = 1;
  sys.topology = ChartTopology::torus({2.0 * kPi});
  sys.eval = [](const Vec& x) { return vec1(std::cos(x(0))); };
  sys.jacobian_fn = [](const Vec& x) {
    Mat j(1, 1);
    j(0, 0) = -std::sin(x(0));
    return j;
  };
  sys.equilibria = {vec1(kPi / 2.0), vec1(3.0 * kPi / 2.0)};
  sys.jacobian_bound = 1.0;
  sys.sample_lo = vec1(0.0);
  sys.sample_hi = vec1(2.0 * kPi);
  sys.name = "north_south_circle";
  return sys;
}

SmoothSystem north_south_circle_map(double embed_dt) {
  SmoothSystem map = flow_time_map(north_south_circle_field(), 1.0, embed_dt);
  map.name = "north_south_map";
  return map;
}

SmoothSystem sinus_sinks_map(double embed_dt) {
  SmoothSystem field = sinus_ascent_field();
  SmoothSystem map = flow_time_map(field, 1.0, embed_dt);
  map.name = "sinus_sinks_map";
  map.equilibria.clear();
  for (double r : sinus_roots())
    map.equilibria.push_back(wrap_point(map.topology, vec1(r)));
  return map;
}

SmoothSystem product_sinus_north_south_map(double embed_dt) {
  SmoothSystem sx = sinus_ascent_field();
  SmoothSystem sy = north_south_circle_field();
  SmoothSystem rx = time_reversed(sx);
  SmoothSystem ry = time_reversed(sy);

  SmoothSystem sys;
  sys.kind = SystemKind::kMap;
  sys.dimension = 2;
  sys.topology = ChartTopology::torus({2.0 / kPi, 2.0 * kPi});
  sys.eval = [sx, sy, embed_dt](const Vec& z) {
    return vec2(advance(sx, vec1(z(0)), 1.0, embed_dt, false).first(0),
                advance(sy, vec1(z(1)), 1.0, embed_dt, false).first(0));
  };
  sys.jacobian_fn = [sx, sy, embed_dt](const Vec& z) {
    Mat j = Mat::Zero(2, 2);
    j(0, 0) = advance(sx, vec1(z(0)), 1.0, embed_dt, true).second(0, 0);
    j(1, 1) = advance(sy, vec1(z(1)), 1.0, embed_dt, true).second(0, 0);
    return j;
  };
  sys.inverse_eval = [rx, ry, embed_dt](const Vec& z) {
    return vec2(advance(rx, vec1(z(0)), 1.0, embed_dt, false).first(0),
                advance(ry, vec1(z(1)), 1.0, embed_dt, false).first(0));
  };
  for (double r : sinus_roots()) {
    const double rw = wrap_point(sys.topology, vec2(r, 0.0))(0);
    sys.equilibria.push_back(vec2(rw, kPi / 2.0));
    sys.equilibria.push_back(vec2(rw, 3.0 * kPi / 2.0));
  }
  sys.sample_lo = vec2(0.0, 0.0);
  sys.sample_hi = vec2(2.0 / kPi, 2.0 * kPi);
  sys.name = "product_sinus_ns";
  sys.params["map_time"] = 1.0;
  sys.params["map_dt"] = embed_dt;
  return sys;
}

SmoothSystem bowen_type_field(const BowenParams& params) {
  if (!(params.bump_radius > 0.0) || params.bump_radius >= kPi / 2.0)
    throw InputError("bump_radius must lie in (0, pi/2) to keep the local "
                     "coordinates invertible");
  SmoothSystem sys;
  sys.kind = SystemKind::kVectorField;
  sys.dimension = 2;
  sys.topology = ChartTopology{{1, 0}, {2.0 * kPi, 0.0}};
  const double eps = params.eps;
  const bool asym = params.asymmetric;
  const double c1 = params.c_stable;
  const double c2 = params.c_unstable;
  const double r0 = params.bump_radius;

  sys.eval = [eps, asym, c1, c2, r0](const Vec& z) {
    const double x = z(0), y = z(1);
    const double s2x = std::sin(2.0 * x), c2x = std::cos(2.0 * x);
    const double h = 0.5 * y * y + 0.5 * c2x;
    const double gx = -s2x, gy = y;  // gradient of the energy
    double fx = y + eps * (0.5 - h) * gx;
    double fy = s2x + eps * (0.5 - h) * gy;
    if (asym) {
      const double dx = recenter(x, 2.0 * kPi);
      const double s = (dx * dx + y * y) / (r0 * r0);
      if (s < 1.0) {
        const double chi = (1.0 - s) * (1.0 - s);
        const double sx = std::sin(x), cx = std::cos(x);
        const double u1 = y - kSqrt2 * sx;
        const double u2 = y + kSqrt2 * sx;
        const double v1 = -(c1 * u1 - c2 * u2) / (2.0 * kSqrt2 * cx);
        const double v2 = 0.5 * (c1 * u1 + c2 * u2);
        fx += chi * v1;
        fy += chi * v2;
      }
    }
    return vec2(fx, fy);
  };

  sys.jacobian_fn = [eps, asym, c1, c2, r0](const Vec& z) {
    const double x = z(0), y = z(1);
    const double s2x = std::sin(2.0 * x), c2x = std::cos(2.0 * x);
    const double h = 0.5 * y * y + 0.5 * c2x;
    const double gx = -s2x, gy = y;
    Mat j(2, 2);
    j << 0.0, 1.0, 2.0 * c2x, 0.0;
    Mat hess(2, 2);
    hess << -2.0 * c2x, 0.0, 0.0, 1.0;
    Vec g = vec2(gx, gy);
    j += eps * (-(g * g.transpose()) + (0.5 - h) * hess);
    if (asym) {
      const double dx = recenter(x, 2.0 * kPi);
      const double s = (dx * dx + y * y) / (r0 * r0);
      if (s < 1.0) {
        const double chi = (1.0 - s) * (1.0 - s);
        const double sx = std::sin(x), cx = std::cos(x);
        const double u1 = y - kSqrt2 * sx;
        const double u2 = y + kSqrt2 * sx;
        const double n = c1 * u1 - c2 * u2;
        const double m = c1 * u1 + c2 * u2;
        const double den = 2.0 * kSqrt2 * cx;
        const double den_x = -2.0 * kSqrt2 * sx;
        const double n_x = -kSqrt2 * cx * (c1 + c2);
        const double n_y = c1 - c2;
        const double m_x = kSqrt2 * cx * (c2 - c1);
        const double m_y = c1 + c2;
        const double v1 = -n / den;
        const double v2 = 0.5 * m;
        const double v1_x = -(n_x * den - n * den_x) / (den * den);
        const double v1_y = -n_y / den;
        const double v2_x = 0.5 * m_x;
        const double v2_y = 0.5 * m_y;
        const double chi_scale = -4.0 * (1.0 - s) / (r0 * r0);
        const double chi_x = chi_scale * dx;
        const double chi_y = chi_scale * y;
        Mat dv(2, 2);
        dv << chi * v1_x + v1 * chi_x, chi * v1_y + v1 * chi_y,
            chi * v2_x + v2 * chi_x, chi * v2_y + v2 * chi_y;
        j += dv;
      }
    }
    return j;
  };

  sys.equilibria = {vec2(0.0, 0.0), vec2(kPi, 0.0), vec2(kPi / 2.0, 0.0),
                    vec2(3.0 * kPi / 2.0, 0.0)};
  sys.sample_lo = vec2(0.0, -2.0);
  sys.sample_hi = vec2(2.0 * kPi, 2.0);
  sys.name = asym ? "bowen_type_asym" : "bowen_type";
  sys.params = {{"eps", eps},
                {"c_stable", c1},
                {"c_unstable", c2},
                {"bump_radius", r0}};
  return sys;
}

SmoothSystem from_config(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("config root must be an object");

  SmoothSystem sys;
  const std::string kind = doc.value("kind", std::string("flow"));
  if (kind == "flow") {
    sys.kind = SystemKind::kVectorField;
  } else if (kind == "map") {
    sys.kind = SystemKind::kMap;
  } else {
    throw InputError("config kind must be \"flow\" or \"map\"");
  }
  if (!doc.contains("dimension") || !doc["dimension"].is_number_integer())
    throw InputError("config needs an integer dimension");
  const int d = doc["dimension"].get<int>();
  if (d < 1 || d > 16) throw InputError("dimension must be in [1, 16]");
  sys.dimension = d;

  sys.topology = ChartTopology::euclidean(d);
  if (doc.contains("topology")) {
    const auto& topo = doc["topology"];
    const auto periodic = topo.value("periodic", std::vector<int>{});
    const auto periods = topo.value("periods", std::vector<double>{});
    if (static_cast<int>(periodic.size()) != d ||
        static_cast<int>(periods.size()) != d)
      throw InputError("topology arrays must match the dimension");
    ChartTopology t;
    for (int i = 0; i < d; ++i) {
      t.periodic.push_back(periodic[static_cast<std::size_t>(i)] ? 1 : 0);
      t.periods.push_back(periods[static_cast<std::size_t>(i)]);
      if (t.periodic.back() && !(t.periods.back() > 0.0))
        throw InputError("periodic coordinates need a positive period");
    }
    sys.topology = t;
  }

  std::map<std::string, double> constants = {{"pi", kPi},
                                             {"e", 2.718281828459045}};
  if (doc.contains("params")) {
    for (const auto& [key, value] : doc["params"].items()) {
      if (!value.is_number()) throw InputError("params must be numeric");
      constants[key] = value.get<double>();
      sys.params[key] = value.get<double>();
    }
  }

  std::vector<std::string> variables;
  for (int i = 0; i < d; ++i) variables.push_back("x" + std::to_string(i + 1));
  const char* alias[3] = {"x", "y", "z"};
  for (int i = 0; i < d && i < 3; ++i) variables.push_back(alias[i]);
  const int n_vars = static_cast<int>(variables.size());
  auto extend = [d, n_vars](const Vec& x) {
    Vec ext(n_vars);
    ext.head(d) = x;
    for (int i = d; i < n_vars; ++i) ext(i) = x(i - d);
    return ext;
  };

  if (!doc.contains("field") || !doc["field"].is_array() ||
      static_cast<int>(doc["field"].size()) != d)
    throw InputError("config needs a field array with one expression per "
                     "component");
  std::vector<Expression> field;
  for (const auto& item : doc["field"])
    field.push_back(Expression::parse(item.get<std::string>(), variables, constants));
  sys.eval = [field, extend, d](const Vec& x) {
    Vec ext = extend(x);
    Vec out(d);
    for (int i = 0; i < d; ++i) out(i) = field[static_cast<std::size_t>(i)].eval(ext);
    return out;
  };

  if (doc.contains("jacobian")) {
    const auto& jac = doc["jacobian"];
    if (!jac.is_array() || static_cast<int>(jac.size()) != d)
      throw InputError("jacobian must be a d x d expression matrix");
    std::vector<Expression> entries;
    for (const auto& row : jac) {
      if (!row.is_array() || static_cast<int>(row.size()) != d)
        throw InputError("jacobian must be a d x d expression matrix");
      for (const auto& item : row)
        entries.push_back(
            Expression::parse(item.get<std::string>(), variables, constants));
    }
    sys.jacobian_fn = [entries, extend, d](const Vec& x) {
      Vec ext = extend(x);
      Mat j(d, d);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
          j(r, c) = entries[static_cast<std::size_t>(r * d + c)].eval(ext);
      return j;
    };
  }

  if (doc.contains("inverse")) {
    const auto& inv = doc["inverse"];
    if (!inv.is_array() || static_cast<int>(inv.size()) != d)
      throw InputError("inverse needs one expression per component");
    std::vector<Expression> inverse;
    for (const auto& item : inv)
      inverse.push_back(
          Expression::parse(item.get<std::string>(), variables, constants));
    sys.inverse_eval = [inverse, extend, d](const Vec& x) {
      Vec ext = extend(x);
      Vec out(d);
      for (int i = 0; i < d; ++i)
        out(i) = inverse[static_cast<std::size_t>(i)].eval(ext);
      return out;
    };
  }

  if (doc.contains("equilibria")) {
    for (const auto& pt : doc["equilibria"]) {
      if (!pt.is_array() || static_cast<int>(pt.size()) != d)
        throw InputError("each equilibrium needs d coordinates");
      Vec p(d);
      for (int i = 0; i < d; ++i) p(i) = pt[static_cast<std::size_t>(i)].get<double>();
      sys.equilibria.push_back(wrap_point(sys.topology, p));
    }
  }

  if (doc.contains("sample_box")) {
    const auto lo = doc["sample_box"].value("lo", std::vector<double>{});
    const auto hi = doc["sample_box"].value("hi", std::vector<double>{});
    if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
      throw InputError("sample_box lo/hi must match the dimension");
    sys.sample_lo = Vec(d);
    sys.sample_hi = Vec(d);
    for (int i = 0; i < d; ++i) {
      sys.sample_lo(i) = lo[static_cast<std::size_t>(i)];
      sys.sample_hi(i) = hi[static_cast<std::size_t>(i)];
    }
  }

  if (doc.contains("jacobian_bound"))
    sys.jacobian_bound = doc["jacobian_bound"].get<double>();
  sys.name = doc.value("name", std::string("config_system"));
  return sys;
}

std::vector<std::string> builtin_names() {
  return {"constant_torus",     "linear_saddle",   "limit_cycle",
          "limit_cycle_repelling", "north_south_circle", "north_south_map",
          "sinus_sinks_map",    "product_sinus_ns", "bowen_type",
          "bowen_type_asym"};
}

SmoothSystem make_builtin(const std::string& name) {
  if (name == "constant_torus") return constant_torus_field();
  if (name == "linear_saddle") {
    Mat a(2, 2);
    a << -1.0, 0.0, 0.0, 1.0;
    SmoothSystem sys = linear_field(a);
    sys.name = "linear_saddle";
    return sys;
  }
  if (name == "limit_cycle") return limit_cycle_field(false);
  if (name == "limit_cycle_repelling") return limit_cycle_field(true);
  if (name == "north_south_circle") return north_south_circle_field();
  if (name == "north_south_map") return north_south_circle_map();
  if (name == "sinus_sinks_map") return sinus_sinks_map();
  if (name == "product_sinus_ns") return product_sinus_north_south_map();
  if (name == "bowen_type") return bowen_type_field();
  if (name == "bowen_type_asym") {
    BowenParams p;
    p.asymmetric = true;
    return bowen_type_field(p);
  }
  std::ostringstream msg;
  msg << "unknown builtin '" << name << "'; available:";
  for (const std::string& n : builtin_names()) msg << ' ' << n;
  throw InputError(msg.str());
}

}  // namespace hyptimes
