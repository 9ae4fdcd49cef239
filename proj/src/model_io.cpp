#include <cstdio>
#include <fstream>
#include <string>

#include "cbmadv/error.hpp"
#include "cbmadv/models.hpp"
#include "cbmadv/textio.hpp"

namespace cbmadv {

namespace {

constexpr const char* kMagic = "cbmadv-model";
constexpr const char* kVersion = "v1";

// Hex floats round-trip exactly, which is what keeps save -> load -> predict
// prediction-identical.
std::string hex_double(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", x);
  return buf;
}

struct TokenReader {
  std::ifstream in;
  explicit TokenReader(const std::string& path) : in(path) {
    if (!in) throw ConfigError("cannot open '" + path + "'");
  }
  std::string str() {
    std::string t;
    if (!(in >> t)) throw ParseError(0, "truncated model file");
    return t;
  }
  void expect(const std::string& want) {
    const std::string got = str();
    if (got != want)
      throw ParseError(0, "expected '" + want + "' in model file, got '" + got + "'");
  }
  long long integer() {
    long long v;
    if (!parse_int64(str(), v)) throw ParseError(0, "bad integer in model file");
    return v;
  }
  std::uint64_t u64() { return static_cast<std::uint64_t>(integer()); }
  double real() {
    const std::string t = str();
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) throw ParseError(0, "bad number '" + t + "' in model file");
    return v;
  }
  Label label() {
    const long long v = integer();
    if (v < 0 || v >= static_cast<long long>(kClassCount))
      throw ParseError(0, "bad class index in model file");
    return kAllLabels[static_cast<std::size_t>(v)];
  }
};

void write_tree(std::ostream& out, const DecisionTreeModel& t) {
  out << "tree " << t.max_depth << ' ' << t.seed << ' ' << t.nodes.size() << '\n';
  for (const auto& n : t.nodes)
    out << n.feature << ' ' << hex_double(n.threshold) << ' ' << n.left << ' '
        << n.right << ' ' << static_cast<int>(n.leaf) << '\n';
}

DecisionTreeModel read_tree(TokenReader& r) {
  r.expect("tree");
  DecisionTreeModel t;
  t.max_depth = static_cast<int>(r.integer());
  t.seed = r.u64();
  const auto n_nodes = static_cast<std::size_t>(r.integer());
  t.nodes.resize(n_nodes);
  for (auto& n : t.nodes) {
    n.feature = static_cast<int>(r.integer());
    n.threshold = r.real();
    n.left = static_cast<int>(r.integer());
    n.right = static_cast<int>(r.integer());
    n.leaf = r.label();
  }
  return t;
}

void write_array(std::ostream& out, const double* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out << ' ' << hex_double(data[i]);
  out << '\n';
}

void read_array(TokenReader& r, double* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) data[i] = r.real();
}

}  // namespace

void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << kMagic << ' ' << kVersion << '\n';
  out << "algorithm " << algorithm_name(model.algorithm()) << '\n';

  std::visit(
      [&out](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MlpModel>) {
          out << "layers " << m.layer_sizes.size();
          for (std::size_t s : m.layer_sizes) out << ' ' << s;
          out << '\n';
          out << "seed " << m.seed << '\n';
          out << "train_f1 " << hex_double(m.final_train_macro_f1) << '\n';
          for (std::size_t l = 0; l < m.weights.size(); ++l) {
            out << "weights " << l << ' ' << m.weights[l].size();
            write_array(out, m.weights[l].data(), m.weights[l].size());
            out << "biases " << l << ' ' << m.biases[l].size();
            write_array(out, m.biases[l].data(), m.biases[l].size());
          }
        } else if constexpr (std::is_same_v<T, DecisionTreeModel>) {
          write_tree(out, m);
        } else if constexpr (std::is_same_v<T, RandomForestModel>) {
          out << "forest " << m.trees.size() << ' ' << m.mtry << ' '
              << (m.bootstrap ? 1 : 0) << ' ' << m.seed << '\n';
          for (const auto& t : m.trees) write_tree(out, t);
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          out << "knn " << m.k << ' ' << m.points.size() << '\n';
          for (std::size_t i = 0; i < m.points.size(); ++i) {
            out << static_cast<int>(m.point_labels[i]);
            write_array(out, m.points[i].data(), kFeatureCount);
          }
        } else if constexpr (std::is_same_v<T, GaussianNbModel>) {
          out << "classes " << m.classes.size() << '\n';
          for (const auto& c : m.classes) {
            out << static_cast<int>(c.label) << ' ' << hex_double(c.log_prior);
            write_array(out, c.mean.data(), kFeatureCount);
            write_array(out, c.variance.data(), kFeatureCount);
          }
        } else if constexpr (std::is_same_v<T, QdaModel>) {
          out << "ridge " << hex_double(m.ridge) << '\n';
          out << "classes " << m.classes.size() << '\n';
          for (const auto& c : m.classes) {
            out << static_cast<int>(c.label) << ' ' << hex_double(c.log_prior) << ' '
                << hex_double(c.log_det);
            write_array(out, c.mean.data(), kFeatureCount);
            write_array(out, c.chol.data(), c.chol.size());
          }
        } else if constexpr (std::is_same_v<T, LinearSvmModel>) {
          out << "lambda " << hex_double(m.lambda) << '\n';
          out << "classes " << m.classes.size() << '\n';
          for (const auto& c : m.classes) {
            out << static_cast<int>(c.label) << ' ' << hex_double(c.b);
            write_array(out, c.w.data(), kFeatureCount);
          }
        } else if constexpr (std::is_same_v<T, AdaBoostModel>) {
          out << "stages " << m.stages.size() << '\n';
          for (const auto& s : m.stages) {
            out << "alpha " << hex_double(s.alpha) << '\n';
            write_tree(out, s.stump);
          }
        }
      },
      model.variant());
  out << "end\n";
}

TrainedModel load_model(const std::string& path) {
  TokenReader r(path);
  r.expect(kMagic);
  r.expect(kVersion);
  r.expect("algorithm");
  const Algorithm algo = parse_algorithm(r.str());

  TrainedModel result;
  switch (algo) {
    case Algorithm::Mlp: {
      MlpModel m;
      r.expect("layers");
      const auto n_layers = static_cast<std::size_t>(r.integer());
      m.layer_sizes.resize(n_layers);
      for (auto& s : m.layer_sizes) s = static_cast<std::size_t>(r.integer());
      r.expect("seed");
      m.seed = r.u64();
      r.expect("train_f1");
      m.final_train_macro_f1 = r.real();
      for (std::size_t l = 0; l + 1 < n_layers; ++l) {
        r.expect("weights");
        if (static_cast<std::size_t>(r.integer()) != l) throw ParseError(0, "layer order mismatch");
        m.weights.emplace_back(static_cast<std::size_t>(r.integer()));
        read_array(r, m.weights.back().data(), m.weights.back().size());
        r.expect("biases");
        if (static_cast<std::size_t>(r.integer()) != l) throw ParseError(0, "layer order mismatch");
        m.biases.emplace_back(static_cast<std::size_t>(r.integer()));
        read_array(r, m.biases.back().data(), m.biases.back().size());
      }
      result = TrainedModel(std::move(m));
      break;
    }
    case Algorithm::DecisionTree:
      result = TrainedModel(read_tree(r));
      break;
    case Algorithm::RandomForest: {
      RandomForestModel m;
      r.expect("forest");
      const auto n_trees = static_cast<std::size_t>(r.integer());
      m.mtry = static_cast<int>(r.integer());
      m.bootstrap = r.integer() != 0;
      m.seed = r.u64();
      m.trees.reserve(n_trees);
      for (std::size_t t = 0; t < n_trees; ++t) m.trees.push_back(read_tree(r));
      result = TrainedModel(std::move(m));
      break;
    }
    case Algorithm::Knn: {
      KnnModel m;
      r.expect("knn");
      m.k = static_cast<int>(r.integer());
      const auto n = static_cast<std::size_t>(r.integer());
      m.points.resize(n);
      m.point_labels.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        m.point_labels[i] = r.label();
        read_array(r, m.points[i].data(), kFeatureCount);
      }
      result = TrainedModel(std::move(m));
      break;
    }
    case Algorithm::GaussianNb: {
      GaussianNbModel m;
      r.expect("classes");
      const auto n = static_cast<std::size_t>(r.integer());
      m.classes.resize(n);
      for (auto& c : m.classes) {
        c.label = r.label();
        c.log_prior = r.real();
        read_array(r, c.mean.data(), kFeatureCount);
        read_array(r, c.variance.data(), kFeatureCount);
      }
      result = TrainedModel(std::move(m));
      break;
    }
    case Algorithm::Qda: {
      QdaModel m;
      r.expect("ridge");
      m.ridge = r.real();
      r.expect("classes");
      const auto n = static_cast<std::size_t>(r.integer());
      m.classes.resize(n);
      for (auto& c : m.classes) {
        c.label = r.label();
        c.log_prior = r.real();
        c.log_det = r.real();
        read_array(r, c.mean.data(), kFeatureCount);
        read_array(r, c.chol.data(), c.chol.size());
      }
      result = TrainedModel(std::move(m));
      break;
    }
    case Algorithm::LinearSvm: {
      LinearSvmModel m;
      r.expect("lambda");
      m.lambda = r.real();
      r.expect("classes");
      const auto n = static_cast<std::size_t>(r.integer());
      m.classes.resize(n);
      for (auto& c : m.classes) {
        c.label = r.label();
        c.b = r.real();
        read_array(r, c.w.data(), kFeatureCount);
      }
      result = TrainedModel(std::move(m));
      break;
    }
    case Algorithm::AdaBoost: {
      AdaBoostModel m;
      r.expect("stages");
      const auto n = static_cast<std::size_t>(r.integer());
      m.stages.reserve(n);
      for (std::size_t s = 0; s < n; ++s) {
        r.expect("alpha");
        AdaBoostModel::Stage stage;
        stage.alpha = r.real();
        stage.stump = read_tree(r);
        m.stages.push_back(std::move(stage));
      }
      result = TrainedModel(std::move(m));
      break;
    }
  }
  r.expect("end");
  return result;
}

}  // namespace cbmadv
