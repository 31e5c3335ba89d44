#include "xray/xray.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace xray;

namespace {

SparseMatrix from_csc(Index rows, Index cols, std::vector<Index> indptr, std::vector<Index> indices,
                      std::vector<double> data) {
  // scipy keeps explicit zeros and unsorted indices; go through triples so
  // both are normalized.
  std::vector<Triple> t;
  t.reserve(data.size());
  if (indptr.size() != static_cast<std::size_t>(cols) + 1) throw Error("indptr must have cols + 1 entries");
  for (Index j = 0; j < cols; ++j)
    for (Index p = indptr[static_cast<std::size_t>(j)]; p < indptr[static_cast<std::size_t>(j) + 1]; ++p)
      t.push_back({indices.at(static_cast<std::size_t>(p)), j, data.at(static_cast<std::size_t>(p))});
  return SparseMatrix::from_triples(t, rows, cols);
}

py::dict result_dict(const XrayResult& r) {
  py::dict d;
  d["anchors"] = r.anchors;
  d["H"] = r.H;
  d["residual_history"] = r.residual_history;
  d["stopped_early"] = r.stopped_early;
  if (r.refined) {
    d["W"] = r.refined->W;
    d["refined_H"] = r.refined->H;
    d["refine_history"] = r.refined->history;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_xray, m) {
  m.doc() = "Separable NMF by conical-hull anchor selection";

  py::register_exception<Error>(m, "XrayError", PyExc_ValueError);

  py::class_<SparseMatrix>(m, "SparseMatrix")
      .def_static("from_dense", &SparseMatrix::from_dense)
      .def_static("from_csc", &from_csc, py::arg("rows"), py::arg("cols"), py::arg("indptr"),
                  py::arg("indices"), py::arg("data"))
      .def_property_readonly("shape", [](const SparseMatrix& s) { return py::make_tuple(s.rows(), s.cols()); })
      .def_property_readonly("nnz", &SparseMatrix::nnz)
      .def("to_dense", &SparseMatrix::to_dense)
      .def("csc", [](const SparseMatrix& s) {
        auto vec = [](auto span) { return std::vector(span.begin(), span.end()); };
        return py::make_tuple(vec(s.col_ptr()), vec(s.row_indices()), vec(s.values()));
      });

  py::class_<GramCache>(m, "GramCache")
      .def_property_readonly("size", &GramCache::size)
      .def_property_readonly("is_dense", &GramCache::is_dense)
      .def_property_readonly("nnz", &GramCache::nnz)
      .def_property_readonly("density", &GramCache::density)
      .def_property_readonly("col_l1", &GramCache::col_l1)
      .def_property_readonly("col_l2sq", &GramCache::col_l2sq)
      .def_property_readonly("frob_sq", &GramCache::frob_sq)
      .def("to_dense", [](const GramCache& C) {
        Eigen::MatrixXd out(C.size(), C.size());
        for (Index j = 0; j < C.size(); ++j) out.col(j) = C.column(j);
        return out;
      });

  m.def("gram", &gram, py::arg("X"), py::arg("dense_threshold") = GramCache::kDefaultDenseThreshold,
        py::call_guard<py::gil_scoped_release>());

  m.def(
      "nnls_solve",
      [](const GramCache& C, const std::vector<Index>& anchors, std::optional<Eigen::MatrixXd> warm,
         double tol, int max_cycles) {
        NnlsResult r;
        {
          py::gil_scoped_release release;
          r = nnls_solve(C, anchors, warm ? &*warm : nullptr, {tol, max_cycles});
        }
        return py::make_tuple(r.B, r.objective, r.cycles);
      },
      py::arg("C"), py::arg("anchors"), py::arg("warm_start") = py::none(),
      py::arg("tol") = NnlsSettings{}.tol, py::arg("max_cycles") = NnlsSettings{}.max_cycles);

  m.def(
      "xray",
      [](const SparseMatrix& X, Index rank, const std::string& criterion, std::uint64_t seed,
         int refine_iters, std::optional<double> improvement_threshold) {
        XrayConfig cfg;
        cfg.rank = rank;
        cfg.criterion = {parse_criterion(criterion), seed};
        cfg.refine_iters = refine_iters;
        cfg.improvement_threshold = improvement_threshold;
        XrayResult r;
        {
          py::gil_scoped_release release;
          r = xray_run(X, cfg);
        }
        return result_dict(r);
      },
      py::arg("X"), py::arg("rank"), py::arg("criterion") = "greedy", py::arg("seed") = 0,
      py::arg("refine_iters") = 0, py::arg("improvement_threshold") = py::none());

  m.def(
      "gen_separable",
      [](Index m_, Index r, Index n, double delta, std::uint64_t seed) {
        SyntheticSpec spec{m_, r, n, delta, seed};
        SyntheticInstance s = gen_separable(spec);
        return py::make_tuple(s.X, s.W, s.H, s.true_anchors);
      },
      py::arg("m") = 200, py::arg("r") = 20, py::arg("n") = 210, py::arg("delta") = 0.0,
      py::arg("seed") = 0);

  m.def("recovery_fraction", [](const std::vector<Index>& found, const std::vector<Index>& truth) {
    return recovery_fraction(found, truth);
  });

  m.def("read_matrix_market", py::overload_cast<const std::filesystem::path&>(&read_matrix_market));
  m.def("write_matrix_market",
        py::overload_cast<const SparseMatrix&, const std::filesystem::path&>(&write_matrix_market));

  m.def(
      "build_docterm",
      [](const std::vector<std::tuple<std::string, std::string, double>>& rows, Index min_df,
         double max_df_frac) {
        std::vector<DocTermTriple> t;
        t.reserve(rows.size());
        for (const auto& [d, w, c] : rows) t.push_back({d, w, c});
        DocTermMatrix dt = build_docterm(t, min_df, max_df_frac);
        return py::make_tuple(dt.X, dt.stats.docs, dt.stats.terms, dt.stats.df);
      },
      py::arg("triples"), py::arg("min_df") = 1, py::arg("max_df_frac") = 1.0);

  m.def(
      "normalize_columns",
      [](const SparseMatrix& X, const std::string& mode) {
        NormalizedMatrix nm = normalize_columns(X, parse_normalization(mode));
        return py::make_tuple(nm.X, nm.zero_columns);
      },
      py::arg("X"), py::arg("mode"));

  m.def("set_num_threads", &set_num_threads);
  m.def("num_threads", &num_threads);
}
