// kcurv: sectional K-curvature toolkit front end. Reads instances as JSON
// (path, inline document, or "-" for stdin) and writes a single JSON
// document to standard output. Exit codes: 0 success, 2 validation error,
// 3 numerical failure.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "kcurv/json_io.hpp"

namespace {

using kcurv::json;

std::string read_input(const std::string& arg) {
  if (arg == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  const auto c = arg.find_first_not_of(" \t\r\n");
  if (c != std::string::npos && (arg[c] == '{' || arg[c] == '[')) return arg;
  std::ifstream in(arg);
  if (!in) throw kcurv::validation_error("cannot open input file: " + arg);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw kcurv::validation_error("malformed JSON input");
  return j;
}

kcurv::StatStructure load_structure(const std::string& arg) {
  return kcurv::structure_from_json(parse_json(read_input(arg)));
}

// A plane argument is either a basis index or a comma-separated vector.
kcurv::VectorXd plane_vector(const std::string& arg, int dim) {
  if (arg.find(',') == std::string::npos) {
    size_t used = 0;
    int idx = -1;
    try {
      idx = std::stoi(arg, &used);
    } catch (const std::exception&) {
      throw kcurv::validation_error("plane: expected an index or comma-separated vector, got '" + arg + "'");
    }
    if (used != arg.size() || idx < 0 || idx >= dim)
      throw kcurv::validation_error("plane: index out of range: '" + arg + "'");
    return kcurv::VectorXd::Unit(dim, idx);
  }
  std::vector<double> vals;
  std::stringstream ss(arg);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      vals.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw kcurv::validation_error("plane: bad vector component '" + tok + "'");
    }
  }
  if (static_cast<int>(vals.size()) != dim)
    throw kcurv::validation_error("plane: vector length != dim");
  kcurv::VectorXd v(dim);
  for (size_t i = 0; i < vals.size(); ++i) v[static_cast<int>(i)] = vals[i];
  return v;
}

void emit(const json& j, bool pretty) {
  std::cout << (pretty ? j.dump(2) : j.dump()) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sectional K-curvature toolkit"};
  app.require_subcommand(1);

  bool pretty = false;
  app.add_flag("--pretty", pretty, "indent the JSON output");

  // curvature
  auto* cmd_curv = app.add_subcommand("curvature", "sectional K-curvature of a plane");
  std::string curv_input;
  std::vector<std::string> curv_plane;
  cmd_curv->add_option("input", curv_input, "instance JSON (path, inline, or -)")->required();
  cmd_curv->add_option("--plane", curv_plane,
                       "two index-or-vector arguments, or one 'i,j' index pair")
      ->expected(1, 2)
      ->required();

  // maximize
  auto* cmd_max = app.add_subcommand("maximize", "maximize Phi(X)=C(X,X,X) on the unit sphere");
  std::string max_input;
  int max_starts = 16;
  std::uint64_t max_seed = 0;
  cmd_max->add_option("input", max_input)->required();
  cmd_max->add_option("--starts", max_starts, "random starts beyond the basis directions");
  cmd_max->add_option("--seed", max_seed, "RNG seed");

  // decompose
  auto* cmd_dec = app.add_subcommand("decompose", "adapted-basis decomposition (constant curvature)");
  std::string dec_input;
  double dec_tol = 1e-8;
  std::uint64_t dec_seed = 0;
  cmd_dec->add_option("input", dec_input)->required();
  cmd_dec->add_option("--tol", dec_tol, "tolerance");
  cmd_dec->add_option("--seed", dec_seed, "RNG seed");

  // verify
  auto* cmd_ver = app.add_subcommand("verify", "run a named check and report residuals");
  std::string ver_input, ver_check;
  double ver_tol = 1e-8;
  std::uint64_t ver_seed = 0;
  cmd_ver->add_option("input", ver_input)->required();
  cmd_ver->add_option("--check", ver_check, "curvature-like | constant | canonical | rigidity | witness")
      ->required()
      ->check(CLI::IsMember({"curvature-like", "constant", "canonical", "rigidity", "witness"}));
  cmd_ver->add_option("--tol", ver_tol, "tolerance");
  cmd_ver->add_option("--seed", ver_seed, "RNG seed");

  // generate
  auto* cmd_gen = app.add_subcommand("generate", "emit an instance from a family spec");
  std::string gen_input, gen_kind;
  int gen_dim = 2;
  double gen_lambda = 0.0, gen_mu = 0.0, gen_a = 0.0;
  std::vector<double> gen_values;
  std::uint64_t gen_seed = 0;
  cmd_gen->add_option("input", gen_input, "family spec JSON (alternative to flags)");
  cmd_gen->add_option("--kind", gen_kind,
                      "lambda_quarter | h_umbilical | tracefree_canonical | diagonal | random | random_tracefree");
  cmd_gen->add_option("--dim", gen_dim);
  auto* opt_lambda = cmd_gen->add_option("--lambda", gen_lambda);
  auto* opt_mu = cmd_gen->add_option("--mu", gen_mu);
  auto* opt_a = cmd_gen->add_option("--A", gen_a);
  cmd_gen->add_option("--values", gen_values, "diagonal values")->delimiter(',');
  cmd_gen->add_option("--seed", gen_seed, "RNG seed");

  // track
  auto* cmd_trk = app.add_subcommand("track", "track a critical frame along a snapshot family");
  std::string trk_input;
  int trk_steps = 10, trk_starts = 16;
  std::uint64_t trk_seed = 0;
  cmd_trk->add_option("input", trk_input, "JSON array of instance snapshots with 't'")->required();
  cmd_trk->add_option("--steps", trk_steps, "path nodes after t=0");
  cmd_trk->add_option("--starts", trk_starts, "starts for the t=0 maximization");
  cmd_trk->add_option("--seed", trk_seed, "RNG seed");

  // manifold-check
  auto* cmd_man = app.add_subcommand("manifold-check", "finite-difference identity checks on a chart");
  std::string man_input, man_field, man_point;
  double man_fd_step = 1e-3;
  bool man_fd_set = false;
  cmd_man->add_option("input", man_input, "polynomial chart JSON (when --field is not given)");
  cmd_man->add_option("--field", man_field, "hessian-exp | sphere")
      ->check(CLI::IsMember({"hessian-exp", "sphere"}));
  cmd_man->add_option("--point", man_point, "comma-separated coordinates")->required();
  cmd_man->add_option("--fd-step", man_fd_step, "finite-difference step")
      ->each([&](const std::string&) { man_fd_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << e.what() << "\n";
    emit(json{{"error", {{"type", "validation"}, {"message", e.what()}}}}, pretty);
    return 2;
  }

  try {
    if (*cmd_curv) {
      const kcurv::StatStructure s = load_structure(curv_input);
      kcurv::Plane p;
      if (curv_plane.size() == 1) {
        // single "i,j" index pair
        const auto c = curv_plane[0].find(',');
        if (c == std::string::npos ||
            curv_plane[0].find(',', c + 1) != std::string::npos)
          throw kcurv::validation_error("plane: a single argument must be an 'i,j' index pair");
        p.u = plane_vector(curv_plane[0].substr(0, c), s.dim());
        p.v = plane_vector(curv_plane[0].substr(c + 1), s.dim());
      } else {
        p.u = plane_vector(curv_plane[0], s.dim());
        p.v = plane_vector(curv_plane[1], s.dim());
      }
      emit(json{{"k", s.sectional_k_curvature(p)}}, pretty);
    } else if (*cmd_max) {
      const kcurv::StatStructure s = load_structure(max_input);
      emit(kcurv::critical_point_to_json(
               kcurv::find_local_max(s, max_starts, max_seed)),
           pretty);
    } else if (*cmd_dec) {
      const kcurv::StatStructure s = load_structure(dec_input);
      emit(kcurv::decomposition_to_json(kcurv::decompose(s, dec_tol, dec_seed)),
           pretty);
    } else if (*cmd_ver) {
      const kcurv::StatStructure s = load_structure(ver_input);
      json out;
      if (ver_check == "curvature-like") {
        out = kcurv::curvature_like_to_json(s.curvature_like_residuals());
        out["trace_free"] = s.is_trace_free(std::max(ver_tol, kcurv::kDefaultTol));
      } else if (ver_check == "constant") {
        const auto a = kcurv::is_constant_curvature(s, ver_tol);
        out["constant"] = a.has_value();
        if (a) out["A"] = *a;
      } else if (ver_check == "canonical") {
        out = kcurv::canonical_to_json(kcurv::characterize_canonical(s, ver_tol));
      } else if (ver_check == "rigidity") {
        out = kcurv::rigidity_to_json(kcurv::rigidity_probe(s, ver_tol, ver_seed));
      } else {  // witness
        const auto w = kcurv::negativity_witness(s, ver_seed);
        out["found"] = w.has_value();
        if (w) {
          out["u"] = kcurv::jio::to_json(w->u);
          out["v"] = kcurv::jio::to_json(w->v);
          out["k"] = s.sectional_k_curvature(*w);
        }
      }
      emit(out, pretty);
    } else if (*cmd_gen) {
      kcurv::FamilySpec spec;
      if (!gen_input.empty()) {
        spec = kcurv::family_spec_from_json(parse_json(read_input(gen_input)));
      } else {
        if (gen_kind.empty())
          throw kcurv::validation_error("generate: --kind or an input spec is required");
        spec.kind = kcurv::family_kind_from_string(gen_kind);
        spec.dim = gen_dim;
        spec.seed = gen_seed;
        if (*opt_lambda) spec.params["lambda"] = gen_lambda;
        if (*opt_mu) spec.params["mu"] = gen_mu;
        if (*opt_a) spec.params["A"] = gen_a;
        if (!gen_values.empty()) {
          spec.values = kcurv::VectorXd::Map(gen_values.data(),
                                             static_cast<int>(gen_values.size()));
          if (spec.kind == kcurv::FamilyKind::diagonal)
            spec.dim = static_cast<int>(gen_values.size());
        }
      }
      emit(kcurv::structure_to_json(spec.make()), pretty);
    } else if (*cmd_trk) {
      const auto family =
          kcurv::family_from_snapshots(parse_json(read_input(trk_input)));
      const kcurv::CriticalPoint start =
          kcurv::find_local_max(family(0.0), trk_starts, trk_seed);
      emit(kcurv::frame_path_to_json(
               kcurv::track_critical_frame(family, trk_steps, start)),
           pretty);
    } else if (*cmd_man) {
      kcurv::ChartField f;
      if (!man_field.empty()) {
        f = man_field == "hessian-exp" ? kcurv::hessian_exp_field(man_fd_step)
                                       : kcurv::sphere_field(man_fd_step);
      } else {
        if (man_input.empty())
          throw kcurv::validation_error("manifold-check: provide --field or a chart JSON input");
        auto spec = kcurv::polynomial_chart_from_json(parse_json(read_input(man_input)));
        if (man_fd_set) spec.fd_step = man_fd_step;
        f = spec.make();
      }
      kcurv::VectorXd p(f.dim);
      if (f.dim == 1 && man_point.find(',') == std::string::npos)
        p[0] = std::stod(man_point);
      else
        p = plane_vector(man_point, f.dim);
      const auto cod = kcurv::check_codazzi(f, p);
      json out = kcurv::identity_report_to_json(kcurv::check_identities(f, p));
      out["codazzi"] = cod.codazzi;
      out["codazzi_asymmetry"] = cod.asymmetry;
      emit(out, pretty);
    }
  } catch (const kcurv::validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    emit(json{{"error", {{"type", "validation"}, {"message", e.what()}}}}, pretty);
    return 2;
  } catch (const kcurv::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    emit(json{{"error", {{"type", "numerical"}, {"message", e.what()}}}}, pretty);
    return 3;
  }
  return 0;
}
