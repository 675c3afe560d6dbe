#include "dualview/model/mlp_baseline.h"

#include "dualview/errors.h"
#include "dualview/model/dualview.h"

namespace dualview::model {

template <typename T>
MlpBaseline<T>::MlpBaseline(std::size_t embed_dim, std::size_t hidden, std::uint64_t seed)
    : embed_dim_(embed_dim), hidden_(hidden) {
  if (embed_dim == 0 || hidden == 0) throw ConfigError("mlp baseline needs positive embed_dim and hidden");
  nn::Rng rng(seed);
  mlp_ = nn::ScoreMlp<T>(registry_, "mlp", 3 * embed_dim, hidden, rng);
}

template <typename T>
nn::Var<T> MlpBaseline<T>::score(nn::Tape<T>& tape, const data::CandidateSet& set) const {
  if (set.candidates.empty()) throw InputError("query '" + set.query_id + "' has no candidates");
  if (set.embed_dim() != embed_dim_) {
    throw DimensionError("query '" + set.query_id + "' has embedding width " + std::to_string(set.embed_dim()) +
                         ", model expects " + std::to_string(embed_dim_));
  }
  const nn::Matrix<T> q = query_matrix<T>(set);
  const nn::Matrix<T> docs = document_matrix<T>(set);
  const Eigen::Index d = docs.cols();
  nn::Matrix<T> f(docs.rows(), 3 * d);
  for (Eigen::Index i = 0; i < docs.rows(); ++i) {
    f.block(i, 0, 1, d) = q;
    f.block(i, d, 1, d) = docs.row(i);
    f.block(i, 2 * d, 1, d) = q.cwiseProduct(docs.row(i));
  }
  return mlp_.forward(tape, tape.constant(std::move(f)));
}

template <typename T>
nn::KeyValues MlpBaseline<T>::checkpoint_header() const {
  return {{"model", "mlp_baseline"}, {"embed_dim", std::to_string(embed_dim_)}, {"hidden", std::to_string(hidden_)}};
}

namespace {

std::size_t header_size(const nn::Checkpoint& ckpt, const std::string& key) {
  const auto v = ckpt.get(key);
  if (!v) throw LoadError("checkpoint header lacks '" + key + "'");
  try {
    std::size_t pos = 0;
    const std::size_t out = std::stoul(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument(*v);
    return out;
  } catch (const std::logic_error&) {
    throw LoadError("checkpoint header '" + key + "' is not an integer: " + *v);
  }
}

}  // namespace

MlpBaseline<float> load_mlp_baseline(const nn::Checkpoint& ckpt) {
  if (ckpt.get("model") != std::optional<std::string>("mlp_baseline")) {
    throw LoadError("checkpoint does not hold an mlp_baseline model");
  }
  MlpBaseline<float> model(header_size(ckpt, "embed_dim"), header_size(ckpt, "hidden"));
  nn::assign_checkpoint(ckpt, model.parameters());
  return model;
}

std::unique_ptr<Scorer<float>> load_scorer(const nn::Checkpoint& ckpt) {
  const auto kind = ckpt.get("model");
  if (kind == std::optional<std::string>("dualview")) {
    return std::make_unique<DualViewModel<float>>(load_dualview(ckpt));
  }
  if (kind == std::optional<std::string>("mlp_baseline")) {
    return std::make_unique<MlpBaseline<float>>(load_mlp_baseline(ckpt));
  }
  throw LoadError("unknown model kind '" + kind.value_or("<missing>") + "' in checkpoint");
}

template class MlpBaseline<float>;
template class MlpBaseline<double>;

}  // namespace dualview::model
