#include "dephkit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dephkit/bloch.hpp"
#include "dephkit/errors.hpp"
#include "dephkit/memory.hpp"

namespace dephkit::cli {

namespace {

using json = nlohmann::ordered_json;

Eigen::Index ix(std::size_t v) { return static_cast<Eigen::Index>(v); }

json parse_json(const std::string &text) {
  try {
    return json::parse(text);
  } catch (const json::exception &e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

template <class T> T field(const json &j, const char *key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &) {
    throw ParseError(std::string("field \"") + key + "\" has the wrong type");
  }
}

std::size_t count_field(const json &j, const char *key) {
  const auto v = field<long long>(j, key);
  if (v < 1) throw ParseError(std::string("field \"") + key + "\" must be a positive count");
  return static_cast<std::size_t>(v);
}

json matrix_json(const ComplexMatrix &m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back({m(r, c).real(), m(r, c).imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

MatrixFile matrix_from_json(const json &j) {
  const std::size_t rows = count_field(j, "rows");
  const std::size_t cols = count_field(j, "cols");
  const json &data = field<json>(j, "data");
  if (!data.is_array() || data.size() != rows * cols) {
    throw ParseError("matrix data must hold rows x cols = " + std::to_string(rows * cols) + " entries");
  }
  MatrixFile mf;
  mf.mat.resize(ix(rows), ix(cols));
  for (std::size_t e = 0; e < data.size(); ++e) {
    const json &pair = data[e];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw ParseError("matrix entry " + std::to_string(e) + " is not a [re, im] pair");
    }
    const double re = pair[0].get<double>(), im = pair[1].get<double>();
    if (!std::isfinite(re) || !std::isfinite(im)) {
      throw ParseError("matrix entry " + std::to_string(e) + " is not finite");
    }
    mf.mat(ix(e / cols), ix(e % cols)) = Complex(re, im);
  }
  if (j.contains("tol")) {
    if (!j["tol"].is_number() || !(j["tol"].get<double>() > 0.0)) throw ParseError("\"tol\" must be positive");
    mf.tol = j["tol"].get<double>();
  }
  return mf;
}

std::vector<ComplexMatrix> matrix_list(const json &j, const char *key) {
  const json &list = field<json>(j, key);
  if (!list.is_array() || list.empty()) throw ParseError(std::string("\"") + key + "\" must be a non-empty list");
  std::vector<ComplexMatrix> out;
  for (const auto &m : list) out.push_back(matrix_from_json(m).mat);
  return out;
}

json matrix_list_json(const std::vector<ComplexMatrix> &ms) {
  json list = json::array();
  for (const auto &m : ms) list.push_back(matrix_json(m));
  return list;
}

std::string dump(const json &j) { return j.dump(1) + "\n"; }

void write_text_file(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot write " + path);
  f << text;
  if (!f) throw ParseError("error while writing " + path);
}

// ---------------------------------------------------------------------------
// Reports

struct Detail {
  std::string check;
  std::string construct;
  double value;
  std::string relation; ///< how value compares with threshold
  double threshold;
  bool passed;
};

struct Report {
  std::string command;
  std::string verdict = "value";
  std::optional<double> value;
  std::vector<Detail> details;
  std::vector<std::pair<std::string, std::string>> inputs; ///< (source, digest)
  json extra = json::object();
  std::optional<ComplexMatrix> matrix;

  bool all_passed() const {
    return std::all_of(details.begin(), details.end(), [](const Detail &d) { return d.passed; });
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string complex_text(Complex z) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g%+.6gi", z.real(), z.imag());
  return buf;
}

void print_matrix_text(std::ostream &out, const ComplexMatrix &m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << "   ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::string s = complex_text(m(r, c));
      out << ' ' << std::string(s.size() < 20 ? 20 - s.size() : 0, ' ') << s;
    }
    out << '\n';
  }
}

void print_report(std::ostream &out, const Report &rep, bool as_json) {
  if (as_json) {
    json j;
    j["command"] = rep.command;
    j["verdict"] = rep.verdict;
    if (rep.value) j["value"] = *rep.value;
    j["details"] = json::array();
    for (const auto &d : rep.details) {
      j["details"].push_back({{"check", d.check},
                              {"construct", d.construct},
                              {"value", d.value},
                              {"relation", d.relation},
                              {"threshold", d.threshold},
                              {"passed", d.passed}});
    }
    j["provenance"] = json::array();
    for (const auto &[src, digest] : rep.inputs) j["provenance"].push_back({{"input", src}, {"fnv1a", digest}});
    for (const auto &[k, v] : rep.extra.items()) j[k] = v;
    if (rep.matrix) j["matrix"] = matrix_json(*rep.matrix);
    out << j.dump(2) << '\n';
    return;
  }
  out << rep.command << ": " << rep.verdict;
  if (rep.value) out << " " << num(*rep.value);
  out << '\n';
  for (const auto &d : rep.details) {
    out << "  [" << (d.passed ? "ok" : "FAIL") << "] " << d.check << ": " << num(d.value) << ' '
        << d.relation << ' ' << num(d.threshold) << "  (" << d.construct << ")\n";
  }
  for (const auto &[k, v] : rep.extra.items()) out << "  " << k << ": " << v.dump() << '\n';
  if (rep.matrix) {
    out << "  matrix " << rep.matrix->rows() << "x" << rep.matrix->cols() << ":\n";
    print_matrix_text(out, *rep.matrix);
  }
  for (const auto &[src, digest] : rep.inputs) out << "  input " << src << " fnv1a:" << digest << '\n';
}

Detail at_most(std::string check, std::string construct, double value, double threshold) {
  return {std::move(check), std::move(construct), value, "<=", threshold, value <= threshold};
}

Detail at_least(std::string check, std::string construct, double value, double threshold) {
  return {std::move(check), std::move(construct), value, ">=", threshold, value >= threshold};
}

// ---------------------------------------------------------------------------
// Command context

struct Options {
  double tol = 1e-9;
  bool tol_explicit = false;
  std::uint64_t seed = 42;
  std::string out_path;
  bool json = false;
};

class Context {
public:
  Context(const Options &opt, Report &rep) : opt_(opt), rep_(rep) {}

  std::string load(const std::string &path) {
    std::string text = read_text_file(path);
    rep_.inputs.emplace_back(path, fnv1a_hex(text));
    return text;
  }

  /// Matrix file plus the tolerance to validate it with.
  std::pair<ComplexMatrix, double> matrix(const std::string &path) {
    MatrixFile mf = parse_matrix(load(path));
    const double tol = opt_.tol_explicit ? opt_.tol : mf.tol.value_or(opt_.tol);
    return {std::move(mf.mat), tol};
  }

  SuperGram super_gram(const std::string &path) {
    auto [m, tol] = matrix(path);
    const std::size_t d = side_root(m.rows(), path);
    return SuperGram(std::move(m), d, tol);
  }

  Channel channel(const std::string &spec) {
    if (spec.rfind("random:", 0) == 0) {
      std::vector<std::size_t> parts;
      std::stringstream ss(spec.substr(7));
      std::string tok;
      while (std::getline(ss, tok, ':')) parts.push_back(parse_count(tok, spec));
      if (parts.empty() || parts.size() > 2) throw ParseError("random channel spec is random:D[:ENV]");
      const std::size_t env = parts.size() == 2 ? parts[1] : 2;
      rep_.inputs.emplace_back(spec, "seed=" + std::to_string(opt_.seed));
      return random_channel(parts[0], env, opt_.seed);
    }
    return parse_channel(load(spec), opt_.tol);
  }

  BipartiteChannel bipartite(const std::string &path) { return parse_bipartite(load(path)); }

  DensityMatrix density(const std::string &path) {
    auto [m, tol] = matrix(path);
    return DensityMatrix(std::move(m), tol);
  }

  double tol() const { return opt_.tol; }

private:
  static std::size_t parse_count(const std::string &tok, const std::string &spec) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(tok, &pos);
      if (pos != tok.size() || v < 1) throw ParseError("");
      return static_cast<std::size_t>(v);
    } catch (const std::exception &) {
      throw ParseError("bad count \"" + tok + "\" in " + spec);
    }
  }

  static std::size_t side_root(Eigen::Index rows, const std::string &path) {
    const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(rows))));
    if (ix(d * d) != rows) {
      throw DimensionError(path + ": side " + std::to_string(rows) + " is not a perfect square d^2");
    }
    return d;
  }

  const Options &opt_;
  Report &rep_;
};

Complex parse_complex(const std::string &s) {
  try {
    const auto comma = s.find(',');
    std::size_t pos = 0;
    const std::string re_s = s.substr(0, comma);
    const double re = std::stod(re_s, &pos);
    if (pos != re_s.size()) throw ParseError("");
    double im = 0.0;
    if (comma != std::string::npos) {
      const std::string im_s = s.substr(comma + 1);
      im = std::stod(im_s, &pos);
      if (pos != im_s.size()) throw ParseError("");
    }
    return {re, im};
  } catch (const std::exception &) {
    throw ParseError("cannot read complex number \"" + s + "\" (expected RE or RE,IM)");
  }
}

json affine_json(const AffineMap &a) {
  json lambda = json::array();
  for (int r = 0; r < 3; ++r) lambda.push_back({a.lambda(r, 0), a.lambda(r, 1), a.lambda(r, 2)});
  return {{"lambda", lambda}, {"t", {a.t(0), a.t(1), a.t(2)}}};
}

void add_realization_checks(Report &rep, const RealizationReport &rr, double tol) {
  for (const auto &c : rr.checks) {
    rep.details.push_back({c.name, c.construct, c.deviation, "<=", tol, c.passed});
  }
}

// ---------------------------------------------------------------------------
// Commands

void cmd_gram_validate(Context &ctx, Report &rep, const std::string &file, std::size_t d_opt) {
  auto [m, tol] = ctx.matrix(file);
  std::size_t d = d_opt;
  if (d == 0) d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(m.rows()))));
  const SuperGramAudit a = audit_super_gram(m, d);
  rep.details.push_back({"shape", "square matrix of side d^2 with finite entries", a.shape_ok ? 0.0 : 1.0,
                         "==", 0.0, a.shape_ok && d >= 2});
  if (a.shape_ok) {
    rep.details.push_back(at_most("unit diagonal", "every diagonal entry of C equals 1", a.diagonal_deviation, tol));
    rep.details.push_back(
        at_most("block structure", "diagonal blocks C_ii all equal C_00", a.block_deviation, tol));
    rep.details.push_back(at_most("hermiticity", "C equals its adjoint", a.hermiticity_deviation, tol));
    rep.details.push_back(at_least("psd", "smallest eigenvalue of C", a.min_eigenvalue, -tol));
  }
  rep.verdict = rep.all_passed() ? "pass" : "fail";
}

void cmd_gram_from_unitaries(Context &ctx, Report &rep, const std::string &file,
                             const std::string &export_prefix) {
  auto [pre, post] = parse_family(ctx.load(file));
  const SuperGram sg = gram_from_controlled_unitaries(pre, post);
  const SuperGramAudit a = audit_super_gram(sg.mat(), sg.d());
  rep.details.push_back(
      at_most("block structure", "diagonal blocks C_ii all equal C_00", a.block_deviation, ctx.tol()));
  rep.details.push_back(at_least("psd", "smallest eigenvalue of C", a.min_eigenvalue, -ctx.tol()));
  rep.verdict = rep.all_passed() ? "pass" : "fail";
  rep.matrix = sg.mat();
  if (!export_prefix.empty()) {
    const Realization r = controlled_unitary_realization(pre, post);
    write_text_file(export_prefix + "-encoder.json", format_bipartite(r.encoder));
    write_text_file(export_prefix + "-decoder.json", format_bipartite(r.decoder));
    write_text_file(export_prefix + "-tau.json", format_matrix(r.memory.mat()));
    rep.extra["realization"] = export_prefix + "-{encoder,decoder,tau}.json";
  }
}

void cmd_gram_from_simulation(Context &ctx, Report &rep, const std::string &enc_file,
                              const std::string &dec_file, const std::string &tau_file) {
  const BipartiteChannel enc = ctx.bipartite(enc_file);
  const BipartiteChannel dec = ctx.bipartite(dec_file);
  const DensityMatrix tau = ctx.density(tau_file);
  const SuperGram sg = gram_from_simulation(enc, dec, tau, ctx.tol());
  rep.verdict = "pass";
  rep.matrix = sg.mat();
}

void cmd_apply(Context &ctx, Report &rep, const std::string &channel_spec, const std::string &gram_file) {
  const Channel ch = ctx.channel(channel_spec);
  const SuperGram sg = ctx.super_gram(gram_file);
  if (ch.dim_in() != sg.d() || ch.dim_out() != sg.d()) {
    throw DimensionError("apply: channel dimensions do not match the Gram matrix (d = " +
                         std::to_string(sg.d()) + ")");
  }
  const Channel result = apply_super(sg, ch, ctx.tol());
  const double residual = (classical_action(result).mat() - classical_action(ch).mat()).cwiseAbs().maxCoeff();
  const double cgp_in = cgp(ch), cgp_out = cgp(result);
  rep.details.push_back(at_most("classical action invariance",
                                "max |T(out) - T(in)| over transition probabilities", residual, ctx.tol()));
  rep.details.push_back(at_most("cgp monotonicity", "cgp(out) - cgp(in)", cgp_out - cgp_in, ctx.tol()));
  rep.extra["cgp_in"] = cgp_in;
  rep.extra["cgp_out"] = cgp_out;
  rep.verdict = rep.all_passed() ? "pass" : "fail";
  rep.value = residual;
  rep.matrix = jamiolkowski(result);
}

void cmd_verify_realization(Context &ctx, Report &rep, const std::string &enc_file,
                            const std::string &dec_file, const std::string &tau_file) {
  const BipartiteChannel enc = ctx.bipartite(enc_file);
  const BipartiteChannel dec = ctx.bipartite(dec_file);
  const DensityMatrix tau = ctx.density(tau_file);
  const RealizationReport rr = verify_dephasing_realization(enc, dec, tau, ctx.tol());
  add_realization_checks(rep, rr, ctx.tol());
  rep.verdict = rr.passed() ? "pass" : "fail";
  if (const ConditionCheck *f = rr.first_failure()) {
    rep.extra["violated_condition"] = f->name;
    rep.extra["violation"] = f->construct;
  } else {
    rep.matrix = gram_from_simulation(enc, dec, tau, ctx.tol()).mat();
  }
}

void cmd_memory_activity(Context &ctx, Report &rep, const std::string &file) {
  auto [m, tol] = ctx.matrix(file);
  if (m.rows() != 4) throw UnsupportedDimensionError("memory-activity: a 4x4 qubit SuperGram is required");
  const SuperGram sg(std::move(m), 2, tol);
  const double activity = memory_activity_qubit(sg);
  const SuperGram nearest = nearest_passive_qubit(sg, tol);
  const double dist = l1_distance(sg.mat(), nearest.mat());
  rep.value = activity;
  rep.details.push_back(at_most("passive compatibility",
                                "memory activity 2|C[00,10] - C[01,11]| (zero iff passive memory suffices)",
                                activity, ctx.tol()));
  rep.details.push_back({"nearest passive distance", "l1 distance to (I (x) L*)(C) equals the activity",
                         std::abs(dist - activity), "<=", 1e-9, std::abs(dist - activity) <= 1e-9});
  rep.matrix = nearest.mat();
}

void cmd_memory_decompose(Context &ctx, Report &rep, const std::string &file, double fit_tol) {
  const SuperGram sg = ctx.super_gram(file);
  const ProductDecomposition dec = decompose_product_qubit(sg, fit_tol);
  const double err = max_abs(dec.reconstruct() - sg.mat());
  rep.details.push_back(
      at_most("reconstruction", "max |sum q_i C1_i (x) C2_i - C| over entries", err, fit_tol));
  rep.details.push_back(at_most("weights", "|sum q_i - 1|", std::abs(dec.total_weight() - 1.0), 1e-6));
  json terms = json::array();
  for (const auto &t : dec.terms) {
    terms.push_back({{"weight", t.weight},
                     {"first", matrix_json(t.first.mat())},
                     {"second", matrix_json(t.second.mat())}});
  }
  rep.extra["terms"] = terms;
  rep.value = static_cast<double>(dec.terms.size());
  rep.verdict = rep.all_passed() ? "pass" : "fail";
}

void cmd_ppt(Context &ctx, Report &rep, const std::string &file, const std::vector<std::size_t> &dims) {
  auto [m, tol] = ctx.matrix(file);
  DimsPair dp;
  if (dims.empty()) {
    const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(m.rows()))));
    dp = {d, d};
  } else if (dims.size() == 2) {
    dp = {dims[0], dims[1]};
  } else {
    throw ParseError("--dims expects A,B");
  }
  if (m.rows() != m.cols() || ix(dp.total()) != m.rows()) {
    throw DimensionError("ppt: matrix side does not equal dimA * dimB");
  }
  const double v = ppt_min_eig(m, dp);
  rep.value = v;
  rep.details.push_back(at_least("ppt", "smallest eigenvalue of the partial transpose", v, -tol));
}

void cmd_family(Context &ctx, Report &rep, const std::string &alpha_s, const std::string &beta_s,
                bool ppt, bool realize, const std::string &unitaries_out) {
  const FamilyParams p(parse_complex(alpha_s), parse_complex(beta_s));
  const SuperGram sg = family_gram(p);
  rep.matrix = sg.mat();
  rep.extra["alpha"] = {p.alpha.real(), p.alpha.imag()};
  rep.extra["beta"] = {p.beta.real(), p.beta.imag()};
  if (ppt) {
    const double v = ppt_min_eig(sg, {3, 3});
    const double closed = 1.0 - std::sqrt(std::norm(p.alpha) + std::norm(p.beta));
    rep.value = v;
    rep.extra["ppt_closed_form"] = closed;
    rep.details.push_back(at_most("ppt closed form",
                                  "|min eig of partial transpose - (1 - sqrt(|a|^2 + |b|^2))|",
                                  std::abs(v - closed), 1e-9));
  }
  if (realize || !unitaries_out.empty()) {
    const auto [pre, post] = family_realization(p);
    const double residual = max_abs(gram_from_controlled_unitaries(pre, post).mat() - sg.mat());
    rep.details.push_back(at_most("realization round trip",
                                  "max |Gram of V_i U_k |0> - C(alpha, beta)| over entries", residual,
                                  ctx.tol()));
    if (!unitaries_out.empty()) {
      write_text_file(unitaries_out, format_family(pre, post));
      rep.extra["unitaries"] = unitaries_out;
    }
  }
  rep.verdict = rep.details.empty() ? "value" : (rep.all_passed() ? "pass" : "fail");
}

void cmd_bloch_affine(Context &ctx, Report &rep, const std::string &channel_spec, const std::string &gram_file) {
  const Channel ch = ctx.channel(channel_spec);
  const AffineMap a = affine_from_channel(ch);
  rep.extra["input"] = affine_json(a);
  rep.details.push_back(at_most("contraction", "largest eigenvalue of Lambda^T Lambda minus 1",
                                Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(a.lambda.transpose() * a.lambda)
                                        .eigenvalues()
                                        .maxCoeff() -
                                    1.0,
                                ctx.tol()));
  if (!gram_file.empty()) {
    const SuperGram sg = ctx.super_gram(gram_file);
    const AffineMap out = gram_action_on_affine(sg, a, ctx.tol());
    rep.extra["output"] = affine_json(out);
    rep.matrix = jam_from_affine(out);
  } else {
    rep.matrix = jam_from_affine(a);
  }
  rep.verdict = rep.all_passed() ? "pass" : "fail";
}

void cmd_demo_nmr(Report &rep) {
  const SuperGram sg = nmr_experimental_gram();
  const double activity = memory_activity_qubit(sg);
  const SuperGram nearest = nearest_passive_qubit(sg, kNmrTol);
  const double dist = l1_distance(sg.mat(), nearest.mat());
  const MarginalGrams mg = marginal_grams(sg, kNmrTol);
  rep.value = activity;
  rep.details.push_back(at_most("published activity", "|M - 0.625| for the three-decimal NMR Gram matrix",
                                std::abs(activity - 0.625), 5e-4));
  rep.details.push_back(at_most("nearest passive distance", "l1 distance to (I (x) L*)(C) equals the activity",
                                std::abs(dist - activity), 1e-9));
  rep.details.push_back({"active memory", "passive-compatible diagonals would give zero activity", activity,
                         ">", kNmrTol, !is_passive_compatible(sg, kNmrTol)});
  rep.extra["ppt_min_eig"] = ppt_min_eig(sg, {2, 2});
  json marg = json::array();
  for (const auto &g : mg.decoder) marg.push_back({g.mat()(0, 1).real(), g.mat()(0, 1).imag()});
  rep.extra["decoder_marginal_offdiag"] = marg;
  rep.verdict = rep.all_passed() ? "pass" : "fail";
  rep.matrix = sg.mat();
}

} // namespace

// ---------------------------------------------------------------------------
// File formats

std::string fnv1a_hex(const std::string &bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_text_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

MatrixFile parse_matrix(const std::string &json_text) { return matrix_from_json(parse_json(json_text)); }

std::string format_matrix(const ComplexMatrix &m) { return dump(matrix_json(m)); }

MatrixFile read_matrix_file(const std::string &path) { return parse_matrix(read_text_file(path)); }

void write_matrix_file(const std::string &path, const ComplexMatrix &m) {
  write_text_file(path, format_matrix(m));
}

Channel parse_channel(const std::string &json_text, double tol) {
  const json j = parse_json(json_text);
  std::string kind;
  if (j.is_object() && j.contains("kind")) {
    kind = field<std::string>(j, "kind");
  } else if (j.is_object() && j.contains("kraus")) {
    kind = "kraus";
  } else if (j.is_object() && j.contains("data")) {
    const ComplexMatrix m = matrix_from_json(j).mat;
    const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(m.rows()))));
    if (m.rows() == m.cols() && d >= 1 && ix(d * d) == m.rows() && is_psd(m, tol) &&
        max_abs(partial_trace(m, {d, d}, Subsystem::First) -
                ComplexMatrix::Identity(ix(d), ix(d)) / static_cast<double>(d)) <= tol) {
      return channel_from_jamiolkowski(m, d, tol);
    }
    if (m.rows() == m.cols() && is_unitary(m, tol)) return unitary_channel(m);
    throw ParseError("channel file: matrix is neither a Jamiolkowski state nor a unitary");
  } else {
    throw ParseError("channel file: missing \"kind\"");
  }

  if (kind == "kraus") {
    std::vector<ComplexMatrix> kraus = matrix_list(j, "kraus");
    const std::size_t din = j.contains("dim_in") ? count_field(j, "dim_in") : static_cast<std::size_t>(kraus[0].cols());
    const std::size_t dout =
        j.contains("dim_out") ? count_field(j, "dim_out") : static_cast<std::size_t>(kraus[0].rows());
    return Channel(din, dout, std::move(kraus));
  }
  if (kind == "jamiolkowski") {
    const std::size_t d = count_field(j, "dim");
    return channel_from_jamiolkowski(matrix_from_json(field<json>(j, "matrix")).mat, d, tol);
  }
  throw ParseError("channel file: unknown kind \"" + kind + "\"");
}

std::string format_channel(const Channel &ch) {
  json j{{"kind", "kraus"}, {"dim_in", ch.dim_in()}, {"dim_out", ch.dim_out()}};
  j["kraus"] = matrix_list_json(ch.kraus());
  return dump(j);
}

BipartiteChannel parse_bipartite(const std::string &json_text) {
  const json j = parse_json(json_text);
  if (j.is_object() && j.contains("kind") && field<std::string>(j, "kind") != "kraus") {
    throw ParseError("bipartite file: only kind \"kraus\" is supported");
  }
  const std::size_t si = count_field(j, "sys_in"), mi = count_field(j, "mem_in");
  const std::size_t so = count_field(j, "sys_out"), mo = count_field(j, "mem_out");
  return BipartiteChannel(si, mi, so, mo, Channel(si * mi, so * mo, matrix_list(j, "kraus")));
}

std::string format_bipartite(const BipartiteChannel &ch) {
  json j{{"kind", "kraus"},         {"sys_in", ch.sys_in()},   {"mem_in", ch.mem_in()},
         {"sys_out", ch.sys_out()}, {"mem_out", ch.mem_out()}};
  j["kraus"] = matrix_list_json(ch.inner().kraus());
  return dump(j);
}

std::pair<ControlledUnitaryFamily, ControlledUnitaryFamily> parse_family(const std::string &json_text) {
  const json j = parse_json(json_text);
  const std::size_t d = count_field(j, "d");
  return {ControlledUnitaryFamily(d, matrix_list(j, "pre")), ControlledUnitaryFamily(d, matrix_list(j, "post"))};
}

std::string format_family(const ControlledUnitaryFamily &pre, const ControlledUnitaryFamily &post) {
  json j{{"d", pre.d()}};
  j["pre"] = matrix_list_json(pre.unitaries());
  j["post"] = matrix_list_json(post.unitaries());
  return dump(j);
}

// ---------------------------------------------------------------------------
// Dispatcher

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Dephasing superchannels: Gram-matrix construction, verification and memory analysis",
               "dephkit"};
  app.require_subcommand(1);
  Options opt;
  auto *tol_opt = app.add_option("--tol", opt.tol, "numerical tolerance (default 1e-9)")->envname("DEPHKIT_TOL");
  app.add_option("--seed", opt.seed, "seed for random:D[:ENV] channels (default 42)");
  app.add_option("--out", opt.out_path, "write the primary matrix output to FILE");
  app.add_flag("--json", opt.json, "machine-readable report");

  Report rep;
  std::function<void(Context &)> action;
  std::string a1, a2, a3, text_opt;
  std::size_t d_opt = 0;
  double fit_tol = 1e-6;
  std::vector<std::size_t> dims;
  std::string alpha = "0", beta = "0";
  bool ppt = false, realize = false;

  const auto sub = [&](const char *name, const char *help, std::function<void(Context &)> fn) {
    CLI::App *s = app.add_subcommand(name, help);
    s->fallthrough();
    s->callback([&, fn, name] {
      rep.command = name;
      action = fn;
    });
    return s;
  };

  auto *s = sub("gram-validate", "check the SuperGram invariants of a matrix file",
                [&](Context &c) { cmd_gram_validate(c, rep, a1, d_opt); });
  s->add_option("file", a1)->required();
  s->add_option("--d", d_opt, "system dimension (default: square root of the side)");

  s = sub("gram-from-unitaries", "Gram matrix of a controlled-unitary family file",
          [&](Context &c) { cmd_gram_from_unitaries(c, rep, a1, text_opt); });
  s->add_option("file", a1)->required();
  s->add_option("--export-realization", text_opt, "write PREFIX-{encoder,decoder,tau}.json");

  s = sub("gram-from-simulation", "Gram matrix simulated by encoder, decoder and memory state",
          [&](Context &c) { cmd_gram_from_simulation(c, rep, a1, a2, a3); });
  s->add_option("encoder", a1)->required();
  s->add_option("decoder", a2)->required();
  s->add_option("tau", a3)->required();

  s = sub("apply", "apply a SuperGram to a channel; writes the output Jamiolkowski matrix",
          [&](Context &c) { cmd_apply(c, rep, a1, a2); });
  s->add_option("channel", a1, "channel file or random:D[:ENV]")->required();
  s->add_option("gram", a2)->required();

  s = sub("verify-realization", "check that encoder, decoder and memory realize a dephasing superchannel",
          [&](Context &c) { cmd_verify_realization(c, rep, a1, a2, a3); });
  s->add_option("encoder", a1)->required();
  s->add_option("decoder", a2)->required();
  s->add_option("tau", a3)->required();

  s = sub("memory-activity", "memory activity of a qubit SuperGram; --out writes the nearest passive Gram",
          [&](Context &c) { cmd_memory_activity(c, rep, a1); });
  s->add_option("file", a1)->required();

  s = sub("memory-decompose", "product decomposition of a passive-compatible qubit SuperGram",
          [&](Context &c) { cmd_memory_decompose(c, rep, a1, fit_tol); });
  s->add_option("file", a1)->required();
  s->add_option("--fit-tol", fit_tol, "reconstruction tolerance (default 1e-6)");

  s = sub("ppt", "smallest eigenvalue of the partial transpose",
          [&](Context &c) { cmd_ppt(c, rep, a1, dims); });
  s->add_option("file", a1)->required();
  s->add_option("--dims", dims, "A,B (default: square)")->delimiter(',');

  s = sub("family", "the qutrit family C(alpha, beta)",
          [&](Context &c) { cmd_family(c, rep, alpha, beta, ppt, realize, text_opt); });
  s->add_option("--alpha", alpha, "RE[,IM]");
  s->add_option("--beta", beta, "RE[,IM]");
  s->add_flag("--ppt", ppt, "report the partial-transpose eigenvalue against its closed form");
  s->add_flag("--realize", realize, "build the controlled unitaries and check the round trip");
  s->add_option("--unitaries-out", text_opt, "write the unitaries as a family file");

  s = sub("bloch-affine", "affine Bloch parameters of a qubit channel, optionally after a SuperGram",
          [&](Context &c) { cmd_bloch_affine(c, rep, a1, a2); });
  s->add_option("channel", a1, "channel file or random:2[:ENV]")->required();
  s->add_option("--gram", a2, "SuperGram file applied to the map");

  sub("demo-nmr", "memory analysis of the bundled NMR Gram matrix", [&](Context &) { cmd_demo_nmr(rep); });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "dephkit: " << e.what() << '\n';
    return 2;
  }
  opt.tol_explicit = tol_opt->count() > 0;
  if (!(opt.tol > 0.0)) {
    err << "dephkit: --tol must be positive\n";
    return 2;
  }

  try {
    Context ctx(opt, rep);
    action(ctx);
    if (rep.matrix && !opt.out_path.empty()) {
      write_matrix_file(opt.out_path, *rep.matrix);
      rep.extra["written"] = opt.out_path;
    }
    print_report(out, rep, opt.json);
    if (rep.verdict == "fail") {
      if (rep.extra.contains("violated_condition")) {
        err << "dephkit: violated condition " << rep.extra["violated_condition"].get<std::string>() << '\n';
      } else {
        for (const auto &d : rep.details)
          if (!d.passed) {
            err << "dephkit: failed check " << d.check << '\n';
            break;
          }
      }
      return 1;
    }
    return 0;
  } catch (const ParseError &e) {
    err << "dephkit: " << e.what() << '\n';
    return 2;
  } catch (const DimensionError &e) {
    err << "dephkit: dimension error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError &e) {
    err << "dephkit: invalid input (" << e.invariant() << "): " << e.what() << '\n';
    return 1;
  } catch (const NotDephasingRealizationError &e) {
    err << "dephkit: not a dephasing realization, violated condition " << e.condition() << ": " << e.what()
        << '\n';
    return 1;
  } catch (const ContractError &e) {
    err << "dephkit: " << e.what() << '\n';
    return 1;
  } catch (const SearchFailureError &e) {
    err << "dephkit: " << e.what() << '\n';
    return 1;
  }
}

} // namespace dephkit::cli
