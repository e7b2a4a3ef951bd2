#include "graphspde/gram.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "graphspde/errors.hpp"

namespace graphspde {

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::laplacian_spatial: return "laplacian_spatial";
    case KernelKind::matern_spatial: return "matern_spatial";
    case KernelKind::separable_product: return "separable_product";
    case KernelKind::shek: return "shek";
    case KernelKind::swek: return "swek";
  }
  return "unknown";
}

double KernelSpec::get(const std::string& name) const {
  auto it = hyper.find(name);
  if (it == hyper.end()) throw std::invalid_argument("kernel " + this->name() + " has no hyperparameter '" + name + "'");
  return it->second;
}

double KernelSpec::get_or(const std::string& name, double fallback) const {
  auto it = hyper.find(name);
  return it == hyper.end() ? fallback : it->second;
}

namespace {

std::vector<std::string> required_hyper(const KernelSpec& spec) {
  switch (spec.kind) {
    case KernelKind::laplacian_spatial: return {"variance"};
    case KernelKind::matern_spatial: return {"variance", "nu", "kappa"};
    case KernelKind::separable_product: {
      std::vector<std::string> names = {"variance", "time_lengthscale"};
      if (spec.spatial == SpatialKind::matern) {
        names.push_back("nu");
        names.push_back("kappa");
      }
      if (spec.temporal == TemporalKind::cosine) names.push_back("frequency");
      return names;
    }
    case KernelKind::shek:
    case KernelKind::swek: return {"c", "sigma", "nu", "kappa"};
  }
  return {};
}

}  // namespace

void KernelSpec::validate() const {
  for (const auto& name : required_hyper(*this)) {
    if (!hyper.contains(name)) throw std::invalid_argument("kernel " + this->name() + " requires '" + name + "'");
  }
  for (const auto& [name, value] : hyper) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument("hyperparameter '" + name + "' must be positive and finite");
    }
  }
}

std::string KernelSpec::name() const {
  switch (kind) {
    case KernelKind::laplacian_spatial: return "laplacian";
    case KernelKind::matern_spatial: return "matern";
    case KernelKind::separable_product:
      return std::string("sep-") + (spatial == SpatialKind::laplacian ? "laplacian" : "matern") + "-" +
             to_string(temporal);
    case KernelKind::shek: return "shek";
    case KernelKind::swek: return "swek";
  }
  return "unknown";
}

std::vector<std::string> KernelSpec::optimizable(bool include_smoothness) const {
  std::vector<std::string> names;
  const bool has_smoothness = kind == KernelKind::matern_spatial || kind == KernelKind::shek ||
                              kind == KernelKind::swek ||
                              (kind == KernelKind::separable_product && spatial == SpatialKind::matern);
  switch (kind) {
    case KernelKind::laplacian_spatial:
    case KernelKind::matern_spatial: names = {"variance"}; break;
    case KernelKind::separable_product:
      names = {"variance", "time_lengthscale"};
      if (temporal == TemporalKind::cosine) names.push_back("frequency");
      break;
    case KernelKind::shek:
    case KernelKind::swek: names = {"c", "sigma"}; break;
  }
  if (include_smoothness && has_smoothness) {
    names.push_back("nu");
    names.push_back("kappa");
  }
  return names;
}

const std::vector<std::string>& kernel_names() {
  static const std::vector<std::string> names = {
      "laplacian", "matern", "sep-matern-rbf", "sep-laplacian-rbf", "sep-matern-exponential",
      "sep-laplacian-exponential", "sep-matern-brownian", "sep-laplacian-brownian", "sep-matern-cosine",
      "sep-laplacian-cosine", "shek", "swek"};
  return names;
}

KernelSpec KernelSpec::from_name(const std::string& name) {
  KernelSpec spec;
  if (name == "laplacian") {
    spec.kind = KernelKind::laplacian_spatial;
    spec.hyper = {{"variance", 1.0}};
  } else if (name == "matern") {
    spec.kind = KernelKind::matern_spatial;
    spec.hyper = {{"variance", 1.0}, {"nu", 1.5}, {"kappa", 1.0}};
  } else if (name == "shek" || name == "swek") {
    spec.kind = name == "shek" ? KernelKind::shek : KernelKind::swek;
    spec.hyper = {{"c", 1.0}, {"sigma", 1.0}, {"nu", 2.0}, {"kappa", 1.0}};
  } else if (name.starts_with("sep-")) {
    const auto dash = name.find('-', 4);
    if (dash == std::string::npos) throw std::invalid_argument("malformed separable kernel name '" + name + "'");
    const std::string spatial = name.substr(4, dash - 4);
    const std::string temporal = name.substr(dash + 1);
    spec.kind = KernelKind::separable_product;
    if (spatial == "laplacian") {
      spec.spatial = SpatialKind::laplacian;
    } else if (spatial == "matern") {
      spec.spatial = SpatialKind::matern;
      spec.hyper = {{"nu", 1.5}, {"kappa", 1.0}};
    } else {
      throw std::invalid_argument("unknown spatial kernel '" + spatial + "' in '" + name + "'");
    }
    spec.temporal = temporal_kind_from_string(temporal);
    spec.hyper["variance"] = 1.0;
    spec.hyper["time_lengthscale"] = 1.0;
    if (spec.temporal == TemporalKind::cosine) spec.hyper["frequency"] = 1.0;
  } else {
    std::ostringstream os;
    os << "unknown kernel '" << name << "'; valid names:";
    for (const auto& n : kernel_names()) os << ' ' << n;
    throw std::invalid_argument(os.str());
  }
  return spec;
}

KernelContext::KernelContext(Graph graph) : graph_(std::move(graph)) {}

std::shared_ptr<const LaplacianMatrix> KernelContext::laplacian(LaplacianVariant variant) const {
  return laplacians_.get_or_create(static_cast<int>(variant), [&] { return graphspde::laplacian(graph_, variant); });
}

std::shared_ptr<const FractionalLaplacian> KernelContext::fractional(LaplacianVariant variant, double nu,
                                                                     double kappa) const {
  return fractionals_.get_or_create({static_cast<int>(variant), nu, kappa}, [&] {
    return fractional_laplacian(*laplacian(variant), nu, kappa);
  });
}

std::shared_ptr<const Eigen::MatrixXd> KernelContext::spatial_kernel(const KernelSpec& spec) const {
  const bool matern = spec.kind == KernelKind::matern_spatial ||
                      (spec.kind == KernelKind::separable_product && spec.spatial == SpatialKind::matern);
  const bool lap = spec.kind == KernelKind::laplacian_spatial ||
                   (spec.kind == KernelKind::separable_product && spec.spatial == SpatialKind::laplacian);
  if (!matern && !lap) throw std::invalid_argument("spatial_kernel: kernel " + spec.name() + " has no spatial factor");
  const double nu = matern ? spec.get("nu") : 0.0;
  const double kappa = matern ? spec.get("kappa") : 0.0;
  return spatial_.get_or_create({static_cast<int>(spec.laplacian_variant), matern ? 1 : 0, nu, kappa}, [&] {
    const auto L = laplacian(spec.laplacian_variant);
    return matern ? matern_graph_kernel(*L, nu, kappa) : laplacian_kernel(*L);
  });
}

namespace {

void check_points(const KernelSpec& spec, const KernelContext& ctx, const std::vector<STPoint>& pts) {
  const bool needs_origin = spec.kind == KernelKind::shek || spec.kind == KernelKind::swek ||
                            (spec.kind == KernelKind::separable_product && spec.temporal == TemporalKind::brownian);
  for (const auto& p : pts) {
    if (p.vertex >= ctx.n_vertices()) throw DataError("point references unknown vertex " + std::to_string(p.vertex));
    if (!std::isfinite(p.time)) throw DataError("point has non-finite time");
    if (needs_origin && p.time < 0.0) {
      throw DataError("kernel " + spec.name() + " is defined only for times >= 0");
    }
  }
}

std::vector<double> unique_times(const std::vector<STPoint>& pts) {
  std::vector<double> times;
  times.reserve(pts.size());
  for (const auto& p : pts) times.push_back(p.time);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

std::vector<std::size_t> time_index(const std::vector<STPoint>& pts, const std::vector<double>& times) {
  std::vector<std::size_t> idx(pts.size());
  for (std::size_t p = 0; p < pts.size(); ++p) {
    idx[p] = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), pts[p].time) - times.begin());
  }
  return idx;
}

/// L̃ for directed graphs, where only integer powers are available: ν = 2
/// gives L̃ = (2ν/κ²) I + L.
Eigen::MatrixXd directed_shifted_laplacian(const KernelSpec& spec, const KernelContext& ctx) {
  const double nu = spec.get("nu");
  if (nu != 2.0) throw std::invalid_argument("directed graphs support SHEK only with nu = 2");
  const auto L = ctx.laplacian(spec.laplacian_variant);
  const double shift = 2.0 * nu / (spec.get("kappa") * spec.get("kappa"));
  return L->matrix + shift * Eigen::MatrixXd::Identity(L->matrix.rows(), L->matrix.cols());
}

template <class BlockFn>
Eigen::MatrixXd blockwise(const std::vector<STPoint>& rows, const std::vector<STPoint>& cols, bool same,
                          BlockFn&& block_at) {
  const auto row_times = unique_times(rows);
  const auto col_times = same ? row_times : unique_times(cols);
  const auto row_idx = time_index(rows, row_times);
  const auto col_idx = time_index(cols, col_times);

  // Group point indices by their time slot so each block is scattered once.
  std::vector<std::vector<std::size_t>> row_groups(row_times.size()), col_groups(col_times.size());
  for (std::size_t p = 0; p < rows.size(); ++p) row_groups[row_idx[p]].push_back(p);
  for (std::size_t q = 0; q < cols.size(); ++q) col_groups[col_idx[q]].push_back(q);

  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < row_times.size(); ++a) {
    for (std::size_t b = same ? a : 0; b < col_times.size(); ++b) {
      const Eigen::MatrixXd block = block_at(row_times[a], col_times[b]);
      for (auto p : row_groups[a]) {
        for (auto q : col_groups[b]) {
          const double v = block(static_cast<Eigen::Index>(rows[p].vertex), static_cast<Eigen::Index>(cols[q].vertex));
          out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = v;
          if (same && a != b) out(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) = v;
        }
      }
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const KernelContext& ctx, const std::vector<STPoint>& rows,
                              const std::vector<STPoint>& cols) {
  spec.validate();
  check_points(spec, ctx, rows);
  check_points(spec, ctx, cols);
  const bool same = &rows == &cols;
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(cols.size());

  switch (spec.kind) {
    case KernelKind::laplacian_spatial:
    case KernelKind::matern_spatial:
    case KernelKind::separable_product: {
      const auto ks = ctx.spatial_kernel(spec);
      const double variance = spec.get("variance");
      const bool separable = spec.kind == KernelKind::separable_product;
      TemporalParams tp;
      if (separable) {
        tp.lengthscale = spec.get("time_lengthscale");
        tp.frequency = spec.get_or("frequency", 1.0);
      }
      Eigen::MatrixXd out(nr, nc);
      for (Eigen::Index p = 0; p < nr; ++p) {
        const auto& rp = rows[static_cast<std::size_t>(p)];
        for (Eigen::Index q = 0; q < nc; ++q) {
          const auto& cq = cols[static_cast<std::size_t>(q)];
          double v = variance * (*ks)(static_cast<Eigen::Index>(rp.vertex), static_cast<Eigen::Index>(cq.vertex));
          if (separable) v *= temporal_kernel(spec.temporal, tp, rp.time, cq.time);
          out(p, q) = v;
        }
      }
      return out;
    }
    case KernelKind::shek:
    case KernelKind::swek: {
      const double c = spec.get("c");
      const double sigma = spec.get("sigma");
      const auto L = ctx.laplacian(spec.laplacian_variant);
      if (!L->symmetric) {
        if (spec.kind == KernelKind::swek) throw std::invalid_argument("SWEK is defined only for undirected graphs");
        const Eigen::MatrixXd lt = directed_shifted_laplacian(spec, ctx);
        return blockwise(rows, cols, same, [&](double t, double s) { return shek_cov_general(lt, c, sigma, t, s); });
      }
      const auto lt = ctx.fractional(spec.laplacian_variant, spec.get("nu"), spec.get("kappa"));
      const auto& dec = lt->decomposition();
      const bool heat = spec.kind == KernelKind::shek;
      Eigen::VectorXd g(dec.eigenvalues.size());
      return blockwise(rows, cols, same, [&](double t, double s) {
        for (Eigen::Index k = 0; k < g.size(); ++k) {
          const double mu = dec.eigenvalues[k];
          g[k] = heat ? modal::shek(mu, c, sigma, t, s) : modal::swek(mu, c, sigma, t, s);
        }
        return Eigen::MatrixXd(dec.basis * g.asDiagonal() * dec.basis.transpose());
      });
    }
  }
  throw std::logic_error("unhandled kernel kind");
}

GramMatrix assemble_gram(const KernelSpec& spec, const KernelContext& ctx, const std::vector<STPoint>& points) {
  GramMatrix gram;
  gram.matrix = kernel_matrix(spec, ctx, points, points);
  gram.matrix = 0.5 * (gram.matrix + gram.matrix.transpose()).eval();
  gram.points = points;
  return gram;
}

std::optional<ModalForm> modal_form(const KernelSpec& spec, const KernelContext& ctx) {
  spec.validate();
  const auto L = ctx.laplacian(spec.laplacian_variant);
  if (!L->symmetric) return std::nullopt;

  ModalForm form;
  switch (spec.kind) {
    case KernelKind::laplacian_spatial:
    case KernelKind::matern_spatial:
    case KernelKind::separable_product: {
      const bool matern = spec.kind == KernelKind::matern_spatial ||
                          (spec.kind == KernelKind::separable_product && spec.spatial == SpatialKind::matern);
      Eigen::VectorXd spatial;
      if (matern) {
        const auto lt = ctx.fractional(spec.laplacian_variant, spec.get("nu"), spec.get("kappa"));
        form.basis = lt->decomposition().basis;
        spatial = lt->shifted_eigs().array().pow(-2.0).matrix();  // (L̃ᵀL̃)^{-1}
      } else {
        const SpectralDecomposition dec = eigendecompose_symmetric(L->matrix);
        form.basis = dec.basis;
        const Eigen::VectorXd sq = dec.eigenvalues.array().square().matrix();
        const double cutoff = kDefaultPinvTol * (sq.size() ? sq.maxCoeff() : 0.0);
        spatial = sq.unaryExpr([cutoff](double v) { return v <= cutoff ? 0.0 : 1.0 / v; });
      }
      const double variance = spec.get("variance");
      if (spec.kind == KernelKind::separable_product) {
        TemporalParams tp{1.0, spec.get("time_lengthscale"), spec.get_or("frequency", 1.0)};
        const TemporalKind tk = spec.temporal;
        form.cov = [spatial, variance, tp, tk](Eigen::Index k, double t, double s) {
          return variance * spatial[k] * temporal_kernel(tk, tp, t, s);
        };
      } else {
        form.cov = [spatial, variance](Eigen::Index k, double, double) { return variance * spatial[k]; };
      }
      return form;
    }
    case KernelKind::shek:
    case KernelKind::swek: {
      const auto lt = ctx.fractional(spec.laplacian_variant, spec.get("nu"), spec.get("kappa"));
      form.basis = lt->decomposition().basis;
      const Eigen::VectorXd mu = lt->decomposition().eigenvalues;
      const double c = spec.get("c");
      const double sigma = spec.get("sigma");
      if (spec.kind == KernelKind::shek) {
        form.cov = [mu, c, sigma](Eigen::Index k, double t, double s) { return modal::shek(mu[k], c, sigma, t, s); };
      } else {
        form.cov = [mu, c, sigma](Eigen::Index k, double t, double s) { return modal::swek(mu[k], c, sigma, t, s); };
      }
      return form;
    }
  }
  return std::nullopt;
}

}  // namespace graphspde
