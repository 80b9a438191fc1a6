#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dephkit/bloch.hpp"
#include "dephkit/channels.hpp"
#include "dephkit/errors.hpp"
#include "dephkit/matcore.hpp"
#include "dephkit/memory.hpp"
#include "dephkit/superchannels.hpp"

namespace py = pybind11;
using namespace dephkit;

namespace {

Channel make_channel(const std::vector<ComplexMatrix> &kraus) {
  if (kraus.empty()) throw DimensionError("channel needs at least one Kraus operator");
  return Channel(static_cast<std::size_t>(kraus.front().cols()), static_cast<std::size_t>(kraus.front().rows()),
                 kraus);
}

std::size_t input_dim(const ComplexMatrix &jam) {
  const auto n = static_cast<std::size_t>(jam.rows());
  std::size_t d = 1;
  while (d * d < n) ++d;
  if (d * d != n) throw DimensionError("Jamiolkowski matrix side must be a square number");
  return d;
}

ControlledUnitaryFamily family(const std::vector<ComplexMatrix> &us) {
  return ControlledUnitaryFamily(us.size(), us);
}

BipartiteChannel bipartite(std::size_t sys_in, std::size_t mem_in, std::size_t sys_out, std::size_t mem_out,
                           const std::vector<ComplexMatrix> &kraus) {
  return BipartiteChannel(sys_in, mem_in, sys_out, mem_out, make_channel(kraus));
}

py::dict report_dict(const RealizationReport &r) {
  py::list checks;
  for (const auto &c : r.checks) {
    py::dict d;
    d["name"] = c.name;
    d["construct"] = c.construct;
    d["passed"] = c.passed;
    d["deviation"] = c.deviation;
    d["detail"] = c.detail;
    checks.append(d);
  }
  py::dict out;
  out["passed"] = r.passed();
  out["checks"] = checks;
  out["c_en"] = r.c_en;
  out["c_de"] = r.c_de;
  out["sigma"] = r.sigma;
  out["consistency_mismatch"] = r.consistency.max_mismatch;
  return out;
}

} // namespace

PYBIND11_MODULE(_dephkit, m) {
  m.doc() = "Dephasing superchannels and memory effects";

  static py::exception<DimensionError> dim_err(m, "DimensionError", PyExc_ValueError);
  static py::exception<ContractError> contract_err(m, "ContractError", PyExc_ValueError);
  static py::exception<SearchFailureError> search_err(m, "SearchFailureError", PyExc_RuntimeError);
  static py::exception<ValidationError> valid_err(m, "ValidationError", contract_err.ptr());
  static py::exception<UnsupportedDimensionError> unsupported_err(m, "UnsupportedDimensionError", contract_err.ptr());
  static py::exception<NotDephasingRealizationError> realization_err(m, "NotDephasingRealizationError",
                                                                     contract_err.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DimensionError &e) {
      dim_err(e.what());
    } catch (const ValidationError &e) {
      valid_err(e.what());
    } catch (const UnsupportedDimensionError &e) {
      unsupported_err(e.what());
    } catch (const NotDephasingRealizationError &e) {
      realization_err(e.what());
    } catch (const ContractError &e) {
      contract_err(e.what());
    } catch (const SearchFailureError &e) {
      search_err(e.what());
    }
  });

  // matcore
  m.def("kron", &kron);
  m.def("schur", &schur);
  m.def("reshuffle", &reshuffle, py::arg("m"), py::arg("d"));
  m.def(
      "partial_trace",
      [](const ComplexMatrix &x, std::size_t a, std::size_t b, bool first) {
        return partial_trace(x, {a, b}, first ? Subsystem::First : Subsystem::Second);
      },
      py::arg("m"), py::arg("dim_a"), py::arg("dim_b"), py::arg("trace_first") = true);
  m.def(
      "partial_transpose",
      [](const ComplexMatrix &x, std::size_t a, std::size_t b, bool first) {
        return partial_transpose(x, {a, b}, first ? Subsystem::First : Subsystem::Second);
      },
      py::arg("m"), py::arg("dim_a"), py::arg("dim_b"), py::arg("transpose_first") = false);
  m.def("is_psd", &is_psd, py::arg("m"), py::arg("tol") = kDefaultPsdTol);
  m.def("is_unitary", &is_unitary, py::arg("m"), py::arg("tol") = 1e-9);

  // channels, passed as lists of Kraus operators
  m.def("jamiolkowski", [](const std::vector<ComplexMatrix> &k) { return jamiolkowski(make_channel(k)); });
  m.def("superop", [](const std::vector<ComplexMatrix> &k) { return superop_from_kraus(make_channel(k)); });
  m.def("kraus_from_jamiolkowski",
        [](const ComplexMatrix &j) { return channel_from_jamiolkowski(j, input_dim(j)).kraus(); });
  m.def("apply_channel", [](const std::vector<ComplexMatrix> &k, const ComplexMatrix &rho) {
    return apply_channel(make_channel(k), DensityMatrix(rho)).mat();
  });
  m.def("dephasing_kraus", [](const ComplexMatrix &c) { return dephasing_channel(GramMatrix(c)).kraus(); });
  m.def("dephase_state", [](const ComplexMatrix &rho, const ComplexMatrix &c) {
    return dephase_state(DensityMatrix(rho), GramMatrix(c)).mat();
  });
  m.def("classical_action", [](const std::vector<ComplexMatrix> &k) { return classical_action(make_channel(k)).mat(); });
  m.def(
      "is_mio", [](const std::vector<ComplexMatrix> &k, double tol) { return is_mio(make_channel(k), tol); },
      py::arg("kraus"), py::arg("tol") = kStateTol);
  m.def("l1_coherence", py::overload_cast<const ComplexMatrix &>(&l1_coherence));
  m.def("cgp", [](const std::vector<ComplexMatrix> &k) { return cgp(make_channel(k)); });
  m.def(
      "random_channel",
      [](std::size_t d, std::size_t env, std::uint64_t seed) { return random_channel(d, env, seed).kraus(); },
      py::arg("d"), py::arg("env_dim"), py::arg("seed"));

  // superchannels
  m.def(
      "validate_super_gram", [](const ComplexMatrix &c, std::size_t d, double tol) {
        return validate_super_gram(c, d, tol).mat();
      },
      py::arg("c"), py::arg("d"), py::arg("tol") = kStateTol);
  m.def(
      "apply_super",
      [](const ComplexMatrix &c, const std::vector<ComplexMatrix> &k) {
        const auto d = static_cast<std::size_t>(k.empty() ? 0 : k.front().rows());
        return jamiolkowski(apply_super(SuperGram(c, d), make_channel(k)));
      },
      py::arg("c"), py::arg("kraus"));
  m.def(
      "gram_from_controlled_unitaries",
      [](const std::vector<ComplexMatrix> &pre, const std::vector<ComplexMatrix> &post) {
        return gram_from_controlled_unitaries(family(pre), family(post)).mat();
      },
      py::arg("pre"), py::arg("post"));
  m.def(
      "gram_from_simulation",
      [](std::size_t d, std::size_t m0, std::size_t m1, std::size_t m2, const std::vector<ComplexMatrix> &enc,
         const std::vector<ComplexMatrix> &dec, const ComplexMatrix &tau) {
        return gram_from_simulation(bipartite(d, m0, d, m1, enc), bipartite(d, m1, d, m2, dec), DensityMatrix(tau))
            .mat();
      },
      py::arg("d"), py::arg("mem_in"), py::arg("mem_mid"), py::arg("mem_out"), py::arg("encoder"),
      py::arg("decoder"), py::arg("tau"));
  m.def(
      "verify_dephasing_realization",
      [](std::size_t d, std::size_t m0, std::size_t m1, std::size_t m2, const std::vector<ComplexMatrix> &enc,
         const std::vector<ComplexMatrix> &dec, const ComplexMatrix &tau) {
        return report_dict(
            verify_dephasing_realization(bipartite(d, m0, d, m1, enc), bipartite(d, m1, d, m2, dec), DensityMatrix(tau)));
      },
      py::arg("d"), py::arg("mem_in"), py::arg("mem_mid"), py::arg("mem_out"), py::arg("encoder"),
      py::arg("decoder"), py::arg("tau"));

  // memory
  m.def("memory_activity", [](const ComplexMatrix &c) { return memory_activity_qubit(SuperGram(c, 2)); });
  m.def("nearest_passive", [](const ComplexMatrix &c) { return nearest_passive_qubit(SuperGram(c, 2)).mat(); });
  m.def("is_passive_compatible", [](const ComplexMatrix &c) { return is_passive_compatible(SuperGram(c, 2)); });
  m.def(
      "decompose_product",
      [](const ComplexMatrix &c, double tol) {
        py::list out;
        for (const auto &t : decompose_product_qubit(SuperGram(c, 2), tol).terms)
          out.append(py::make_tuple(t.weight, t.first.mat(), t.second.mat()));
        return out;
      },
      py::arg("c"), py::arg("tol") = 1e-6);
  m.def(
      "ppt_min_eig",
      [](const ComplexMatrix &x, std::size_t a, std::size_t b) { return ppt_min_eig(x, {a, b}); },
      py::arg("m"), py::arg("dim_a"), py::arg("dim_b"));
  m.def(
      "family_gram", [](Complex a, Complex b) { return family_gram(FamilyParams(a, b)).mat(); }, py::arg("alpha"),
      py::arg("beta"));
  m.def(
      "family_realization",
      [](Complex a, Complex b) {
        const auto [pre, post] = family_realization(FamilyParams(a, b));
        return py::make_tuple(pre.unitaries(), post.unitaries());
      },
      py::arg("alpha"), py::arg("beta"));
  m.def("nmr_experimental_gram", [] { return nmr_experimental_gram().mat(); });

  // bloch
  m.def("pauli", &pauli);
  m.def("affine_from_kraus", [](const std::vector<ComplexMatrix> &k) {
    const AffineMap a = affine_from_channel(make_channel(k));
    return py::make_tuple(a.lambda, a.t);
  });
  m.def("jam_from_affine", [](const Eigen::Matrix3d &lambda, const Eigen::Vector3d &t) {
    AffineMap a;
    a.lambda = lambda;
    a.t = t;
    return jam_from_affine(a);
  });
  m.def("gram_action_on_affine", [](const ComplexMatrix &c, const Eigen::Matrix3d &lambda, const Eigen::Vector3d &t) {
    AffineMap a;
    a.lambda = lambda;
    a.t = t;
    const AffineMap out = gram_action_on_affine(SuperGram(c, 2), a);
    return py::make_tuple(out.lambda, out.t);
  });
}
