#include "reflexq/nn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "reflexq/errors.hpp"
#include "reflexq/random.hpp"
#include "reflexq/text_io.hpp"

namespace reflexq {

namespace {

// Four fixed accumulators: vectorizable without reassociation, same result on every call.
inline double dot(const double* __restrict a, const double* __restrict b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

// exp-based tanh, well under 1e-15 absolute error and much cheaper than libm tanh.
inline double fast_tanh(double x) {
  if (x > 20.0) return 1.0;
  if (x < -20.0) return -1.0;
  const double e = std::exp(2.0 * x);
  return (e - 1.0) / (e + 1.0);
}

inline void axpy(double alpha, const double* __restrict x, double* __restrict y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

const char* activation_name(Activation a) { return a == Activation::Tanh ? "tanh" : "identity"; }

Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw InputError("model: unknown activation '" + s + "'");
}

void resize_workspace(const std::vector<DenseLayer>& layers, NetWorkspace& ws) {
  if (ws.activations.size() == layers.size() + 1) return;
  ws.activations.resize(layers.size() + 1);
  ws.deltas.resize(layers.size());
  ws.activations[0].resize(layers.front().inputs);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    ws.activations[l + 1].resize(layers[l].outputs);
    ws.deltas[l].resize(layers[l].outputs);
  }
}

}  // namespace

QNetwork::QNetwork(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InputError("network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.inputs == 0 || layer.outputs == 0) throw InputError("network layer sizes must be >= 1");
    if (layer.weights.size() != layer.inputs * layer.outputs || layer.bias.size() != layer.outputs) {
      throw InputError("network layer " + std::to_string(l) + " has inconsistent parameter shapes");
    }
    if (l > 0 && layers_[l - 1].outputs != layer.inputs) {
      throw InputError("network layer " + std::to_string(l) + " input size does not match previous output");
    }
  }
}

QNetwork QNetwork::init(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  if (sizes.size() < 3) throw InputError("network needs an input size, at least one hidden layer, and an output size");
  for (std::size_t s : sizes) {
    if (s == 0) throw InputError("network layer sizes must be >= 1");
  }
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.inputs = sizes[l];
    layer.outputs = sizes[l + 1];
    layer.activation = l + 2 < sizes.size() ? Activation::Tanh : Activation::Identity;
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
    layer.weights.resize(layer.inputs * layer.outputs);
    for (double& w : layer.weights) w = uniform(rng, -scale, scale);
    layer.bias.assign(layer.outputs, 0.0);
    layers.push_back(std::move(layer));
  }
  return QNetwork(std::move(layers));
}

std::vector<std::size_t> QNetwork::layer_sizes() const {
  std::vector<std::size_t> sizes{layers_.front().inputs};
  for (const auto& l : layers_) sizes.push_back(l.outputs);
  return sizes;
}

std::size_t QNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

void QNetwork::check_input(std::span<const double> input) const {
  if (input.size() != input_dim()) {
    throw InputError("network input has " + std::to_string(input.size()) + " components, expected " +
                     std::to_string(input_dim()));
  }
  for (double v : input) {
    if (!std::isfinite(v)) throw InputError("network input contains a non-finite value");
  }
}

std::span<const double> QNetwork::forward(std::span<const double> input, NetWorkspace& ws) const {
  check_input(input);
  resize_workspace(layers_, ws);
  std::copy(input.begin(), input.end(), ws.activations[0].begin());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    const double* x = ws.activations[l].data();
    double* out = ws.activations[l + 1].data();
    for (std::size_t j = 0; j < layer.outputs; ++j) {
      out[j] = layer.bias[j] + dot(&layer.weights[j * layer.inputs], x, layer.inputs);
    }
    if (layer.activation == Activation::Tanh) {
      for (std::size_t j = 0; j < layer.outputs; ++j) out[j] = fast_tanh(out[j]);
    }
  }
  return ws.activations.back();
}

std::vector<double> QNetwork::forward(std::span<const double> input) const {
  NetWorkspace ws;
  const auto out = forward(input, ws);
  return {out.begin(), out.end()};
}

void QNetwork::backward(std::size_t action, double error, NetWorkspace& ws) const {
  const std::size_t last = layers_.size() - 1;
  auto& top = ws.deltas[last];
  std::fill(top.begin(), top.end(), 0.0);
  top[action] = layers_[last].activation == Activation::Tanh
                    ? error * (1.0 - ws.activations[last + 1][action] * ws.activations[last + 1][action])
                    : error;
  for (std::size_t l = last; l > 0; --l) {
    const DenseLayer& layer = layers_[l];
    const auto& delta = ws.deltas[l];
    auto& below = ws.deltas[l - 1];
    std::fill(below.begin(), below.end(), 0.0);
    if (l == last) {
      axpy(delta[action], &layer.weights[action * layer.inputs], below.data(), layer.inputs);
    } else {
      for (std::size_t j = 0; j < layer.outputs; ++j) {
        axpy(delta[j], &layer.weights[j * layer.inputs], below.data(), layer.inputs);
      }
    }
    const auto& act = ws.activations[l];
    if (layers_[l - 1].activation == Activation::Tanh) {
      for (std::size_t i = 0; i < below.size(); ++i) below[i] *= 1.0 - act[i] * act[i];
    }
  }
}

std::vector<double> QNetwork::gradient(std::span<const double> input, std::size_t action, double target) const {
  if (action >= output_dim()) throw InputError("action index out of range");
  NetWorkspace ws;
  const double q = forward(input, ws)[action];
  backward(action, q - target, ws);
  std::vector<double> grad;
  grad.reserve(parameter_count());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& a = ws.activations[l];
    const auto& d = ws.deltas[l];
    for (std::size_t j = 0; j < layers_[l].outputs; ++j)
      for (std::size_t i = 0; i < layers_[l].inputs; ++i) grad.push_back(d[j] * a[i]);
    grad.insert(grad.end(), d.begin(), d.end());
  }
  return grad;
}

double QNetwork::train_on_target(std::span<const double> input, std::size_t action, double target,
                                 double step_size, NetWorkspace& ws) {
  if (action >= output_dim()) throw InputError("action index out of range");
  if (!std::isfinite(target)) throw TrainingDiverged("non-finite training target");
  if (!(step_size > 0.0)) throw InputError("step size must be > 0");
  const double q = forward(input, ws)[action];
  const double error = q - target;
  backward(action, error, ws);
  for (const auto& d : ws.deltas) {
    for (double v : d) {
      if (!std::isfinite(v)) {
        throw TrainingDiverged("non-finite gradient (Q=" + text::format_double(q) +
                               ", target=" + text::format_double(target) + ")");
      }
    }
  }
  const std::size_t last = layers_.size() - 1;
  // Largest possible change per layer; refuse the step rather than write inf into the weights.
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    double amax = 1.0, dmax = 0.0;
    for (double v : ws.activations[l]) amax = std::max(amax, std::abs(v));
    for (double v : ws.deltas[l]) dmax = std::max(dmax, std::abs(v));
    if (!std::isfinite(step_size * dmax * amax) || step_size * dmax * amax > 1e300) {
      throw TrainingDiverged("non-finite parameter update (Q=" + text::format_double(q) +
                             ", target=" + text::format_double(target) + ")");
    }
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    DenseLayer& layer = layers_[l];
    const double* a = ws.activations[l].data();
    const auto& d = ws.deltas[l];
    const std::size_t first = l == last ? action : 0;
    const std::size_t end = l == last ? action + 1 : layer.outputs;
    for (std::size_t j = first; j < end; ++j) {
      const double g = -step_size * d[j];
      axpy(g, a, &layer.weights[j * layer.inputs], layer.inputs);
      layer.bias[j] += g;
    }
  }
  return -error;
}

double QNetwork::train_on_target(std::span<const double> input, std::size_t action, double target,
                                 double step_size) {
  NetWorkspace ws;
  return train_on_target(input, action, target, step_size, ws);
}

std::vector<double> QNetwork::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.weights.begin(), l.weights.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void QNetwork::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw InputError("parameter vector has the wrong length");
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (double& w : l.weights) w = flat[k++];
    for (double& b : l.bias) b = flat[k++];
  }
}

QNetwork clone(const QNetwork& net) { return net; }

namespace {

constexpr const char* kModelMagic = "reflexq-model";
constexpr int kModelVersion = 1;

void put_values(std::ostringstream& out, const char* tag, const std::vector<double>& values) {
  out << tag << ' ' << values.size();
  for (double v : values) out << ' ' << text::format_double(v);
  out << '\n';
}

std::vector<double> get_values(std::istringstream& in, const std::string& tag) {
  std::string got;
  std::size_t count = 0;
  if (!(in >> got >> count) || got != tag) throw InputError("model: expected '" + tag + "' record");
  std::vector<double> values(count);
  for (double& v : values) {
    std::string token;
    if (!(in >> token)) throw InputError("model: truncated '" + tag + "' record");
    v = text::parse_double(token, "model " + tag);
  }
  return values;
}

}  // namespace

std::string to_text(const ModelCheckpoint& model) {
  std::ostringstream out;
  const auto& layers = model.net.layers();
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "layers " << layers.size() << '\n';
  out << "sizes";
  for (std::size_t s : model.net.layer_sizes()) out << ' ' << s;
  out << "\nactivations";
  for (const auto& l : layers) out << ' ' << activation_name(l.activation);
  out << '\n';
  put_values(out, "input_scale", model.input_scale);
  put_values(out, "action_forces", model.action_forces);
  for (const auto& l : layers) {
    put_values(out, "weights", l.weights);
    put_values(out, "bias", l.bias);
  }
  out << "end\n";
  return out.str();
}

ModelCheckpoint model_from_text(const std::string& contents) {
  std::istringstream in(contents);
  std::string magic, tag;
  int version = 0;
  if (!(in >> magic >> version) || magic != kModelMagic) throw InputError("model: not a reflexq model file");
  if (version != kModelVersion) throw InputError("model: unsupported version " + std::to_string(version));
  std::size_t count = 0;
  if (!(in >> tag >> count) || tag != "layers" || count == 0) throw InputError("model: bad layer count");
  if (!(in >> tag) || tag != "sizes") throw InputError("model: expected sizes");
  std::vector<std::size_t> sizes(count + 1);
  for (auto& s : sizes) {
    if (!(in >> s)) throw InputError("model: bad sizes");
  }
  if (!(in >> tag) || tag != "activations") throw InputError("model: expected activations");
  std::vector<DenseLayer> layers(count);
  for (std::size_t l = 0; l < count; ++l) {
    std::string name;
    if (!(in >> name)) throw InputError("model: bad activations");
    layers[l].activation = parse_activation(name);
    layers[l].inputs = sizes[l];
    layers[l].outputs = sizes[l + 1];
  }
  ModelCheckpoint model;
  model.input_scale = get_values(in, "input_scale");
  model.action_forces = get_values(in, "action_forces");
  for (auto& l : layers) {
    l.weights = get_values(in, "weights");
    l.bias = get_values(in, "bias");
  }
  if (!(in >> tag) || tag != "end") throw InputError("model: missing end marker");
  model.net = QNetwork(std::move(layers));
  if (!model.input_scale.empty() && model.input_scale.size() != model.net.input_dim()) {
    throw InputError("model: input_scale length does not match input size");
  }
  if (!model.action_forces.empty() && model.action_forces.size() != model.net.output_dim()) {
    throw InputError("model: action_forces length does not match output size");
  }
  return model;
}

void save_model(const ModelCheckpoint& model, const std::filesystem::path& path) {
  text::write_file(path, to_text(model));
}

ModelCheckpoint load_model(const std::filesystem::path& path) { return model_from_text(text::read_file(path)); }

}  // namespace reflexq
