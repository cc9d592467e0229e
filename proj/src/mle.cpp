#include "logcave/mle.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "logcave/simplex_integrals.hpp"

namespace logcave {

namespace {

using nlohmann::json;

// Moment-matched Gaussian log-density as starting heights; a cheap,
// scale-aware log-concave start.
Vec gaussian_initial_heights(const DataSet& data) {
  const int d = data.dim;
  const int n = data.size();
  Vec mu = Vec::Zero(d);
  for (int i = 0; i < n; ++i) mu += data.weights[i] * data.points[i];
  Mat cov = Mat::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    Vec c = data.points[i] - mu;
    cov += data.weights[i] * c * c.transpose();
  }
  double ridge = std::max(1e-10 * cov.trace() / d, 1e-12);
  Eigen::LLT<Mat> llt;
  for (;;) {
    llt.compute(cov + ridge * Mat::Identity(d, d));
    if (llt.info() == Eigen::Success) break;
    ridge *= 10.0;
  }
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  const double norm_const = -0.5 * d * std::log(2.0 * M_PI) - 0.5 * logdet;
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    Vec c = data.points[i] - mu;
    y[i] = norm_const - 0.5 * c.dot(llt.solve(c));
  }
  return y;
}

DataSet drop_negligible_weights(const DataSet& data) {
  std::vector<int> keep;
  for (int i = 0; i < data.size(); ++i)
    if (data.weights[i] >= 1e-12) keep.push_back(i);
  if (static_cast<int>(keep.size()) == data.size()) return data;
  std::vector<Vec> pts;
  Vec w(static_cast<int>(keep.size()));
  double s = 0.0;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    pts.push_back(data.points[keep[k]]);
    w[k] = data.weights[keep[k]];
    s += w[k];
  }
  w /= s;
  return DataSet::make(std::move(pts), w);
}

LogConcaveDensity build_model(const DataSet& data, const Vec& y, bool parallel) {
  LogConcaveDensity model;
  model.data = data;
  model.y_star = y;
  model.tent = make_tent(data, y);
  const int d = data.dim;
  const auto& cells = model.tent.tri.simplices;
  model.masses.resize(cells.size());
  std::vector<double> coefs;
  if (parallel)
    detail::cell_integral_terms_parallel(cells, y, false, model.masses, coefs);
  else
    detail::cell_integral_terms_serial(cells, y, false, model.masses, coefs);
  model.total_integral = 0.0;
  for (double q : model.masses) model.total_integral += q;
  (void)d;
  return model;
}

}  // namespace

double density_evaluate(const LogConcaveDensity& model, const Vec& x) {
  return std::exp(tent_evaluate(model.tent, x));
}

FitResult fit(const DataSet& input, const FitOptions& opts) {
  DataSet data = drop_negligible_weights(input);

  detail::ObjectiveEngine engine(data, opts.parallel);
  const ObjectiveFn f = [&engine](const Vec& y) -> double {
    try {
      return engine.eval(y).sigma;
    } catch (const OverflowError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const SubgradientFn g = [&engine](const Vec& y) { return engine.eval(y).subgradient; };
  const double eta = opts.solver.eta;
  const CallerCriterion normalized = [&engine, eta](const Vec& y) {
    const auto cached = engine.cached_integral(y);
    const double integral = cached ? *cached : engine.eval(y).integral;
    return std::abs(1.0 - integral) <= eta;
  };

  Vec y0;
  if (opts.initial_heights) {
    if (opts.initial_heights->size() != data.size())
      throw InvalidInput("initial heights length does not match point count");
    y0 = *opts.initial_heights;
  } else {
    y0 = gaussian_initial_heights(data);
    // Shift so the initial tent integrates to one; adding a constant c to
    // every height scales the integral by exp(c).
    y0.array() -= std::log(engine.eval(y0).integral);
  }

  SolveResult stats = minimize_r_algorithm(f, g, y0, opts.solver, normalized);
  if (opts.polish_iterations > 0) {
    SolverOptions polish = opts.solver;
    polish.max_iter = opts.polish_iterations;
    polish.initial_step = std::max(opts.solver.eps, 1e-3);
    SolveResult polished = minimize_subgradient(f, g, stats.y_opt, polish, normalized);
    if (polished.objective_value < stats.objective_value) {
      stats.y_opt = polished.y_opt;
      stats.objective_value = polished.objective_value;
    }
    stats.iterations += polished.iterations;
  }

  FitResult out{build_model(data, stats.y_opt, opts.parallel),
                stats.termination_reason != TerminationReason::MaxIter, std::move(stats)};
  return out;
}

namespace {

json to_json(const LogConcaveDensity& model) {
  json doc;
  doc["format_version"] = 1;
  doc["d"] = model.data.dim;
  doc["n"] = model.data.size();
  json pts = json::array();
  for (const auto& p : model.data.points)
    pts.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  doc["points"] = std::move(pts);
  doc["weights"] =
      std::vector<double>(model.data.weights.data(), model.data.weights.data() + model.data.size());
  doc["y_star"] =
      std::vector<double>(model.y_star.data(), model.y_star.data() + model.y_star.size());
  json cells = json::array();
  for (const auto& c : model.tent.tri.simplices) cells.push_back(c.vertices);
  doc["simplices"] = std::move(cells);
  doc["total_integral"] = model.total_integral;
  return doc;
}

const json& field(const json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) throw FormatError("missing field", std::string("/") + name);
  return *it;
}

LogConcaveDensity from_json(const json& doc) {
  if (!doc.is_object()) throw FormatError("document is not an object", "/");
  if (field(doc, "format_version") != 1) throw FormatError("unsupported version", "/format_version");
  int d, n;
  try {
    d = field(doc, "d").get<int>();
    n = field(doc, "n").get<int>();
  } catch (const json::exception&) {
    throw FormatError("d and n must be integers", "/d");
  }
  if (d < 1) throw FormatError("d must be positive", "/d");

  const json& jpts = field(doc, "points");
  if (!jpts.is_array() || static_cast<int>(jpts.size()) != n)
    throw FormatError("points must be an array of length n", "/points");
  std::vector<Vec> pts(n);
  for (int i = 0; i < n; ++i) {
    if (!jpts[i].is_array() || static_cast<int>(jpts[i].size()) != d)
      throw FormatError("point has wrong dimension", "/points/" + std::to_string(i));
    Vec p(d);
    for (int k = 0; k < d; ++k) {
      if (!jpts[i][k].is_number())
        throw FormatError("coordinate is not a number",
                          "/points/" + std::to_string(i) + "/" + std::to_string(k));
      p[k] = jpts[i][k].get<double>();
    }
    pts[i] = std::move(p);
  }

  const json& jw = field(doc, "weights");
  if (!jw.is_array() || static_cast<int>(jw.size()) != n)
    throw FormatError("weights must be an array of length n", "/weights");
  Vec w(n);
  for (int i = 0; i < n; ++i) w[i] = jw[i].get<double>();

  const json& jy = field(doc, "y_star");
  if (!jy.is_array() || static_cast<int>(jy.size()) != n)
    throw FormatError("y_star must be an array of length n", "/y_star");
  Vec y(n);
  for (int i = 0; i < n; ++i) y[i] = jy[i].get<double>();

  DataSet data;
  try {
    data = DataSet::make(std::move(pts), w);
  } catch (const InvalidInput& e) {
    throw FormatError(e.what(), "/points");
  }

  const json& jcells = field(doc, "simplices");
  if (!jcells.is_array() || jcells.empty())
    throw FormatError("simplices must be a non-empty array", "/simplices");

  LogConcaveDensity model;
  model.data = std::move(data);
  model.y_star = std::move(y);
  model.tent.y = model.y_star;
  model.tent.tri.hull = convex_hull(model.data.points);
  auto& cells = model.tent.tri.simplices;
  cells.resize(jcells.size());
  for (std::size_t c = 0; c < jcells.size(); ++c) {
    const json& jc = jcells[c];
    if (!jc.is_array() || static_cast<int>(jc.size()) != d + 1)
      throw FormatError("simplex must list d+1 vertex indices", "/simplices/" + std::to_string(c));
    SimplexCell cell;
    cell.vertices.resize(d + 1);
    for (int l = 0; l <= d; ++l) {
      const int v = jc[l].get<int>();
      if (v < 0 || v >= model.data.size())
        throw FormatError("vertex index out of range",
                          "/simplices/" + std::to_string(c) + "/" + std::to_string(l));
      cell.vertices[l] = v;
    }
    cell.origin = model.data.points[cell.vertices[0]];
    cell.edges.resize(d, d);
    for (int l = 1; l <= d; ++l)
      cell.edges.col(l - 1) = model.data.points[cell.vertices[l]] - cell.origin;
    Eigen::PartialPivLU<Mat> lu(cell.edges);
    cell.absdet = std::abs(lu.determinant());
    double colprod = 1.0;
    for (int l = 0; l < d; ++l) colprod *= cell.edges.col(l).norm();
    cell.invertible = cell.absdet > 1e-10 * colprod;
    if (cell.invertible) cell.inv_edges = lu.inverse();
    cells[c] = std::move(cell);
  }
  model.tent.pieces = detail::make_pieces(cells, model.y_star);

  model.masses.resize(cells.size());
  std::vector<double> coefs;
  detail::cell_integral_terms_serial(cells, model.y_star, false, model.masses, coefs);
  model.total_integral = 0.0;
  for (double q : model.masses) model.total_integral += q;

  const double stored = field(doc, "total_integral").get<double>();
  if (std::abs(stored - model.total_integral) > 1e-9 * std::max(1.0, std::abs(stored)))
    throw FormatError("total_integral does not match the stored triangulation",
                      "/total_integral");
  return model;
}

}  // namespace

void save(const LogConcaveDensity& model, std::ostream& sink) {
  sink << to_json(model).dump(1) << '\n';
  if (!sink) throw IoError("failed writing model");
}

void save(const LogConcaveDensity& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  save(model, out);
}

LogConcaveDensity load(std::istream& source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed model document: ") + e.what(), "/");
  }
  try {
    return from_json(doc);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad field type: ") + e.what(), "/");
  }
}

LogConcaveDensity load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  return load(in);
}

}  // namespace logcave
