#include "wmatch/onnx_runtime.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "onnx_subset.pb.h"
#include "wmatch/errors.hpp"

namespace wmatch::onnx {

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (auto d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

namespace {

using RowMajorMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Attribute {
  std::int64_t i = 0;
  float f = 0.0f;
  std::string s;
  std::vector<std::int64_t> ints;
  std::vector<float> floats;
  Tensor t;
  bool has_tensor = false;
};

struct Node {
  std::string op;
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, Attribute> attrs;

  const Attribute* attr(const std::string& key) const {
    auto it = attrs.find(key);
    return it == attrs.end() ? nullptr : &it->second;
  }
  std::int64_t int_attr(const std::string& key, std::int64_t fallback) const {
    const auto* a = attr(key);
    return a ? a->i : fallback;
  }
  float float_attr(const std::string& key, float fallback) const {
    const auto* a = attr(key);
    return a ? a->f : fallback;
  }
  std::vector<std::int64_t> ints_attr(const std::string& key, std::vector<std::int64_t> fallback) const {
    const auto* a = attr(key);
    return a ? a->ints : fallback;
  }
  std::string string_attr(const std::string& key, std::string fallback) const {
    const auto* a = attr(key);
    return a ? a->s : fallback;
  }
};

const std::set<std::string>& supported_ops() {
  static const std::set<std::string> ops{"Conv",      "BatchNormalization", "Relu", "LeakyRelu", "Clip",
                                         "MaxPool",   "AveragePool",        "GlobalAveragePool",
                                         "Add",       "Sub",                "Mul",  "Div",
                                         "Identity",  "Constant",           "Cast"};
  return ops;
}

Tensor tensor_from_proto(const TensorProto& proto) {
  Tensor t;
  t.shape.assign(proto.dims().begin(), proto.dims().end());
  const std::size_t n = t.numel();
  t.data.resize(n);
  const bool raw = proto.has_raw_data();
  switch (proto.data_type()) {
    case TensorProto::FLOAT:
      if (raw) {
        require(proto.raw_data().size() == n * 4, ErrorCode::format, "tensor " + proto.name() + ": raw size mismatch");
        for (std::size_t i = 0; i < n; ++i) {
          std::uint32_t bits = 0;
          for (int b = 0; b < 4; ++b) {
            bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(proto.raw_data()[i * 4 + b])) << (8 * b);
          }
          t.data[i] = std::bit_cast<float>(bits);
        }
      } else {
        require(static_cast<std::size_t>(proto.float_data_size()) == n, ErrorCode::format,
                "tensor " + proto.name() + ": float_data size mismatch");
        std::copy(proto.float_data().begin(), proto.float_data().end(), t.data.begin());
      }
      break;
    case TensorProto::INT64:
      if (raw) {
        require(proto.raw_data().size() == n * 8, ErrorCode::format, "tensor " + proto.name() + ": raw size mismatch");
        for (std::size_t i = 0; i < n; ++i) {
          std::uint64_t bits = 0;
          for (int b = 0; b < 8; ++b) {
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(proto.raw_data()[i * 8 + b])) << (8 * b);
          }
          t.data[i] = static_cast<float>(static_cast<std::int64_t>(bits));
        }
      } else {
        require(static_cast<std::size_t>(proto.int64_data_size()) == n, ErrorCode::format,
                "tensor " + proto.name() + ": int64_data size mismatch");
        for (std::size_t i = 0; i < n; ++i) t.data[i] = static_cast<float>(proto.int64_data(static_cast<int>(i)));
      }
      break;
    case TensorProto::DOUBLE:
      if (raw) {
        require(proto.raw_data().size() == n * 8, ErrorCode::format, "tensor " + proto.name() + ": raw size mismatch");
        for (std::size_t i = 0; i < n; ++i) {
          std::uint64_t bits = 0;
          for (int b = 0; b < 8; ++b) {
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(proto.raw_data()[i * 8 + b])) << (8 * b);
          }
          t.data[i] = static_cast<float>(std::bit_cast<double>(bits));
        }
      } else {
        require(static_cast<std::size_t>(proto.double_data_size()) == n, ErrorCode::format,
                "tensor " + proto.name() + ": double_data size mismatch");
        for (std::size_t i = 0; i < n; ++i) t.data[i] = static_cast<float>(proto.double_data(static_cast<int>(i)));
      }
      break;
    default:
      fail(ErrorCode::unsupported,
           "tensor " + proto.name() + ": unsupported data type " + std::to_string(proto.data_type()));
  }
  return t;
}

std::string shape_string(const std::vector<std::int64_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << "]";
  return os.str();
}

struct Window {
  std::int64_t kernel_h, kernel_w, stride_h, stride_w, dil_h, dil_w;
  std::int64_t pad_top, pad_left, out_h, out_w;
};

Window plan_window(const Node& node, std::int64_t in_h, std::int64_t in_w, std::int64_t kh, std::int64_t kw,
                   bool ceil_mode) {
  const auto strides = node.ints_attr("strides", {1, 1});
  const auto dilations = node.ints_attr("dilations", {1, 1});
  auto pads = node.ints_attr("pads", {0, 0, 0, 0});
  require(strides.size() == 2 && dilations.size() == 2 && pads.size() == 4, ErrorCode::unsupported,
          node.op + " " + node.name + ": only 2-D windows are supported");
  Window w{kh, kw, strides[0], strides[1], dilations[0], dilations[1], 0, 0, 0, 0};
  const std::int64_t eff_h = w.dil_h * (kh - 1) + 1;
  const std::int64_t eff_w = w.dil_w * (kw - 1) + 1;
  const std::string auto_pad = node.string_attr("auto_pad", "NOTSET");
  if (auto_pad == "SAME_UPPER" || auto_pad == "SAME_LOWER") {
    w.out_h = (in_h + w.stride_h - 1) / w.stride_h;
    w.out_w = (in_w + w.stride_w - 1) / w.stride_w;
    const std::int64_t total_h = std::max<std::int64_t>((w.out_h - 1) * w.stride_h + eff_h - in_h, 0);
    const std::int64_t total_w = std::max<std::int64_t>((w.out_w - 1) * w.stride_w + eff_w - in_w, 0);
    w.pad_top = auto_pad == "SAME_UPPER" ? total_h / 2 : total_h - total_h / 2;
    w.pad_left = auto_pad == "SAME_UPPER" ? total_w / 2 : total_w - total_w / 2;
    return w;
  }
  if (auto_pad == "VALID") pads = {0, 0, 0, 0};
  require(auto_pad == "NOTSET" || auto_pad == "VALID", ErrorCode::unsupported, "unknown auto_pad " + auto_pad);
  w.pad_top = pads[0];
  w.pad_left = pads[1];
  const std::int64_t span_h = in_h + pads[0] + pads[2] - eff_h;
  const std::int64_t span_w = in_w + pads[1] + pads[3] - eff_w;
  require(span_h >= 0 && span_w >= 0, ErrorCode::shape_mismatch, node.op + " " + node.name + ": window larger than input");
  if (ceil_mode) {
    w.out_h = (span_h + w.stride_h - 1) / w.stride_h + 1;
    w.out_w = (span_w + w.stride_w - 1) / w.stride_w + 1;
    if ((w.out_h - 1) * w.stride_h >= in_h + pads[0]) --w.out_h;
    if ((w.out_w - 1) * w.stride_w >= in_w + pads[1]) --w.out_w;
  } else {
    w.out_h = span_h / w.stride_h + 1;
    w.out_w = span_w / w.stride_w + 1;
  }
  return w;
}

void require_4d(const Tensor& t, const Node& node) {
  require(t.shape.size() == 4, ErrorCode::shape_mismatch,
          node.op + " " + node.name + ": expected NCHW input, got " + shape_string(t.shape));
}

Tensor conv(const Node& node, const Tensor& x, const Tensor& weight, const Tensor* bias) {
  require_4d(x, node);
  require(weight.shape.size() == 4, ErrorCode::shape_mismatch, "Conv " + node.name + ": weight must be 4-D");
  const std::int64_t n = x.shape[0], c = x.shape[1], h = x.shape[2], wd = x.shape[3];
  const std::int64_t m = weight.shape[0], cg = weight.shape[1], kh = weight.shape[2], kw = weight.shape[3];
  const std::int64_t group = node.int_attr("group", 1);
  require(group >= 1 && c == cg * group && m % group == 0, ErrorCode::shape_mismatch,
          "Conv " + node.name + ": channel/group mismatch " + shape_string(x.shape) + " vs " + shape_string(weight.shape));
  const Window win = plan_window(node, h, wd, kh, kw, false);
  const std::int64_t mg = m / group;
  const std::int64_t k = cg * kh * kw;
  const std::int64_t l = win.out_h * win.out_w;

  Tensor y;
  y.shape = {n, m, win.out_h, win.out_w};
  y.data.assign(y.numel(), 0.0f);
  RowMajorMatrix cols(k, l);
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t g = 0; g < group; ++g) {
      for (std::int64_t ci = 0; ci < cg; ++ci) {
        const float* plane = &x.data[static_cast<std::size_t>(((b * c) + g * cg + ci) * h * wd)];
        for (std::int64_t ky = 0; ky < kh; ++ky) {
          for (std::int64_t kx = 0; kx < kw; ++kx) {
            float* row = cols.row((ci * kh + ky) * kw + kx).data();
            for (std::int64_t oy = 0; oy < win.out_h; ++oy) {
              const std::int64_t iy = oy * win.stride_h - win.pad_top + ky * win.dil_h;
              for (std::int64_t ox = 0; ox < win.out_w; ++ox) {
                const std::int64_t ix = ox * win.stride_w - win.pad_left + kx * win.dil_w;
                row[oy * win.out_w + ox] = (iy >= 0 && iy < h && ix >= 0 && ix < wd) ? plane[iy * wd + ix] : 0.0f;
              }
            }
          }
        }
      }
      Eigen::Map<const RowMajorMatrix> wmat(&weight.data[static_cast<std::size_t>(g * mg * k)], mg, k);
      Eigen::Map<RowMajorMatrix> out(&y.data[static_cast<std::size_t>((b * m + g * mg) * l)], mg, l);
      out.noalias() = wmat * cols;
      if (bias) {
        for (std::int64_t oc = 0; oc < mg; ++oc) out.row(oc).array() += bias->data[static_cast<std::size_t>(g * mg + oc)];
      }
    }
  }
  return y;
}

Tensor pool(const Node& node, const Tensor& x, bool is_max) {
  require_4d(x, node);
  const auto kernel = node.ints_attr("kernel_shape", {});
  require(kernel.size() == 2, ErrorCode::unsupported, node.op + " " + node.name + ": kernel_shape must be 2-D");
  const Window win = plan_window(node, x.shape[2], x.shape[3], kernel[0], kernel[1], node.int_attr("ceil_mode", 0) != 0);
  const bool include_pad = node.int_attr("count_include_pad", 0) != 0;
  const std::int64_t planes = x.shape[0] * x.shape[1], h = x.shape[2], wd = x.shape[3];
  Tensor y;
  y.shape = {x.shape[0], x.shape[1], win.out_h, win.out_w};
  y.data.resize(y.numel());
  for (std::int64_t p = 0; p < planes; ++p) {
    const float* in = &x.data[static_cast<std::size_t>(p * h * wd)];
    float* out = &y.data[static_cast<std::size_t>(p * win.out_h * win.out_w)];
    for (std::int64_t oy = 0; oy < win.out_h; ++oy) {
      for (std::int64_t ox = 0; ox < win.out_w; ++ox) {
        float best = -std::numeric_limits<float>::infinity();
        double sum = 0.0;
        std::int64_t count = 0;
        for (std::int64_t ky = 0; ky < win.kernel_h; ++ky) {
          const std::int64_t iy = oy * win.stride_h - win.pad_top + ky * win.dil_h;
          for (std::int64_t kx = 0; kx < win.kernel_w; ++kx) {
            const std::int64_t ix = ox * win.stride_w - win.pad_left + kx * win.dil_w;
            if (iy < 0 || iy >= h || ix < 0 || ix >= wd) continue;
            const float v = in[iy * wd + ix];
            best = std::max(best, v);
            sum += v;
            ++count;
          }
        }
        const std::int64_t divisor = include_pad ? win.kernel_h * win.kernel_w : std::max<std::int64_t>(count, 1);
        out[oy * win.out_w + ox] = is_max ? best : static_cast<float>(sum / static_cast<double>(divisor));
      }
    }
  }
  return y;
}

Tensor broadcast_binary(const Node& node, const Tensor& a, const Tensor& b, const std::function<float(float, float)>& op) {
  if (a.shape == b.shape) {
    Tensor y{a.shape, std::vector<float>(a.numel())};
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] = op(a.data[i], b.data[i]);
    return y;
  }
  const std::size_t rank = std::max(a.shape.size(), b.shape.size());
  auto padded = [rank](const std::vector<std::int64_t>& s) {
    std::vector<std::int64_t> p(rank - s.size(), 1);
    p.insert(p.end(), s.begin(), s.end());
    return p;
  };
  const auto sa = padded(a.shape);
  const auto sb = padded(b.shape);
  std::vector<std::int64_t> out_shape(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    require(sa[d] == sb[d] || sa[d] == 1 || sb[d] == 1, ErrorCode::shape_mismatch,
            node.op + " " + node.name + ": cannot broadcast " + shape_string(a.shape) + " with " + shape_string(b.shape));
    out_shape[d] = std::max(sa[d], sb[d]);
  }
  auto strides_for = [rank](const std::vector<std::int64_t>& s) {
    std::vector<std::int64_t> st(rank, 0);
    std::int64_t acc = 1;
    for (std::size_t d = rank; d-- > 0;) {
      st[d] = s[d] == 1 ? 0 : acc;
      acc *= s[d];
    }
    return st;
  };
  const auto st_a = strides_for(sa);
  const auto st_b = strides_for(sb);
  Tensor y;
  y.shape = out_shape;
  y.data.resize(y.numel());
  std::vector<std::int64_t> idx(rank, 0);
  for (std::size_t i = 0; i < y.data.size(); ++i) {
    std::int64_t ia = 0, ib = 0;
    for (std::size_t d = 0; d < rank; ++d) {
      ia += idx[d] * st_a[d];
      ib += idx[d] * st_b[d];
    }
    y.data[i] = op(a.data[static_cast<std::size_t>(ia)], b.data[static_cast<std::size_t>(ib)]);
    for (std::size_t d = rank; d-- > 0;) {
      if (++idx[d] < out_shape[d]) break;
      idx[d] = 0;
    }
  }
  return y;
}

}  // namespace

struct Model::Impl {
  std::unordered_map<std::string, Tensor> initializers;
  std::vector<Node> nodes;
  std::string input;
  std::string output;
  // Index of the last node reading each activation, for early release.
  std::unordered_map<std::string, std::size_t> last_use;

  const Tensor& fetch(const std::unordered_map<std::string, Tensor>& values, const std::string& name,
                      const Node& node) const {
    if (auto it = values.find(name); it != values.end()) return it->second;
    if (auto it = initializers.find(name); it != initializers.end()) return it->second;
    fail(ErrorCode::format, node.op + " " + node.name + ": missing input '" + name + "'");
  }

  Tensor evaluate(const Node& node, const std::unordered_map<std::string, Tensor>& values) const {
    auto in = [&](std::size_t i) -> const Tensor& { return fetch(values, node.inputs.at(i), node); };
    auto has_input = [&](std::size_t i) { return node.inputs.size() > i && !node.inputs[i].empty(); };
    const std::string& op = node.op;

    if (op == "Conv") return conv(node, in(0), in(1), has_input(2) ? &in(2) : nullptr);
    if (op == "MaxPool") return pool(node, in(0), true);
    if (op == "AveragePool") return pool(node, in(0), false);
    if (op == "Identity") return in(0);
    if (op == "Cast") {
      // Values are held as float; only casts to float are meaningful here.
      require(node.int_attr("to", 0) == 1, ErrorCode::unsupported, "Cast " + node.name + ": only to FLOAT");
      return in(0);
    }
    if (op == "Constant") {
      const auto* value = node.attr("value");
      require(value && value->has_tensor, ErrorCode::unsupported, "Constant " + node.name + ": only tensor values");
      return value->t;
    }
    if (op == "Relu" || op == "LeakyRelu" || op == "Clip") {
      Tensor y = in(0);
      if (op == "Relu") {
        for (float& v : y.data) v = std::max(v, 0.0f);
      } else if (op == "LeakyRelu") {
        const float alpha = node.float_attr("alpha", 0.01f);
        for (float& v : y.data) v = v < 0.0f ? alpha * v : v;
      } else {
        float lo = node.float_attr("min", -std::numeric_limits<float>::infinity());
        float hi = node.float_attr("max", std::numeric_limits<float>::infinity());
        if (has_input(1)) lo = in(1).data.at(0);
        if (has_input(2)) hi = in(2).data.at(0);
        for (float& v : y.data) v = std::clamp(v, lo, hi);
      }
      return y;
    }
    if (op == "BatchNormalization") {
      const Tensor& x = in(0);
      require_4d(x, node);
      const Tensor& scale = in(1);
      const Tensor& shift = in(2);
      const Tensor& mean = in(3);
      const Tensor& var = in(4);
      const float eps = node.float_attr("epsilon", 1e-5f);
      const std::int64_t c = x.shape[1];
      const std::int64_t plane = x.shape[2] * x.shape[3];
      Tensor y = x;
      for (std::int64_t b = 0; b < x.shape[0]; ++b) {
        for (std::int64_t ch = 0; ch < c; ++ch) {
          const auto k = static_cast<std::size_t>(ch);
          const float gain = scale.data[k] / std::sqrt(var.data[k] + eps);
          const float offset = shift.data[k] - mean.data[k] * gain;
          float* p = &y.data[static_cast<std::size_t>((b * c + ch) * plane)];
          for (std::int64_t i = 0; i < plane; ++i) p[i] = p[i] * gain + offset;
        }
      }
      return y;
    }
    if (op == "GlobalAveragePool") {
      const Tensor& x = in(0);
      require_4d(x, node);
      const std::int64_t planes = x.shape[0] * x.shape[1];
      const std::int64_t plane = x.shape[2] * x.shape[3];
      Tensor y{{x.shape[0], x.shape[1], 1, 1}, std::vector<float>(static_cast<std::size_t>(planes))};
      for (std::int64_t p = 0; p < planes; ++p) {
        double s = 0.0;
        for (std::int64_t i = 0; i < plane; ++i) s += x.data[static_cast<std::size_t>(p * plane + i)];
        y.data[static_cast<std::size_t>(p)] = static_cast<float>(s / static_cast<double>(plane));
      }
      return y;
    }
    if (op == "Add") return broadcast_binary(node, in(0), in(1), [](float a, float b) { return a + b; });
    if (op == "Sub") return broadcast_binary(node, in(0), in(1), [](float a, float b) { return a - b; });
    if (op == "Mul") return broadcast_binary(node, in(0), in(1), [](float a, float b) { return a * b; });
    if (op == "Div") return broadcast_binary(node, in(0), in(1), [](float a, float b) { return a / b; });
    fail(ErrorCode::unsupported, "unsupported operator " + op);
  }
};

Model::Model(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;
Model::~Model() = default;

Model Model::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open model " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

Model Model::parse(std::string_view bytes) {
  ModelProto proto;
  require(proto.ParseFromArray(bytes.data(), static_cast<int>(bytes.size())), ErrorCode::format,
          "model file is not a valid ONNX protobuf");
  require(proto.has_graph(), ErrorCode::format, "ONNX model has no graph");
  const GraphProto& graph = proto.graph();

  auto impl = std::make_unique<Impl>();
  for (const auto& init : graph.initializer()) impl->initializers.emplace(init.name(), tensor_from_proto(init));

  std::vector<std::string> inputs;
  for (const auto& vi : graph.input()) {
    if (!impl->initializers.contains(vi.name())) inputs.push_back(vi.name());
  }
  require(inputs.size() == 1, ErrorCode::unsupported,
          "model must have exactly one non-initializer input, found " + std::to_string(inputs.size()));
  require(graph.output_size() == 1, ErrorCode::unsupported,
          "model must have exactly one output, found " + std::to_string(graph.output_size()));
  impl->input = inputs.front();
  impl->output = graph.output(0).name();

  for (const auto& np : graph.node()) {
    require(np.domain().empty() || np.domain() == "ai.onnx", ErrorCode::unsupported,
            "operator domain '" + np.domain() + "' not supported");
    require(supported_ops().contains(np.op_type()), ErrorCode::unsupported,
            "unsupported operator " + np.op_type() + " (node '" + np.name() + "')");
    Node node;
    node.op = np.op_type();
    node.name = np.name();
    node.inputs.assign(np.input().begin(), np.input().end());
    node.outputs.assign(np.output().begin(), np.output().end());
    require(!node.outputs.empty(), ErrorCode::format, "node " + node.name + " has no output");
    for (const auto& ap : np.attribute()) {
      Attribute a;
      a.i = ap.i();
      a.f = ap.f();
      a.s = ap.s();
      a.ints.assign(ap.ints().begin(), ap.ints().end());
      a.floats.assign(ap.floats().begin(), ap.floats().end());
      if (ap.has_t()) {
        a.t = tensor_from_proto(ap.t());
        a.has_tensor = true;
      }
      node.attrs.emplace(ap.name(), std::move(a));
    }
    impl->nodes.push_back(std::move(node));
  }

  std::set<std::string> produced{impl->input};
  for (const auto& [name, _] : impl->initializers) produced.insert(name);
  for (std::size_t i = 0; i < impl->nodes.size(); ++i) {
    for (const auto& name : impl->nodes[i].inputs) {
      if (name.empty()) continue;
      require(produced.contains(name), ErrorCode::format,
              "node '" + impl->nodes[i].name + "' reads '" + name + "' before it is produced");
      impl->last_use[name] = i;
    }
    for (const auto& name : impl->nodes[i].outputs) produced.insert(name);
  }
  require(produced.contains(impl->output), ErrorCode::format, "graph output '" + impl->output + "' is never produced");
  return Model(std::move(impl));
}

const std::string& Model::input_name() const { return impl_->input; }
const std::string& Model::output_name() const { return impl_->output; }
std::size_t Model::node_count() const { return impl_->nodes.size(); }

Tensor Model::run(const Tensor& input) const {
  require(input.data.size() == input.numel(), ErrorCode::shape_mismatch, "input tensor data/shape mismatch");
  std::unordered_map<std::string, Tensor> values;
  values.emplace(impl_->input, input);
  for (std::size_t i = 0; i < impl_->nodes.size(); ++i) {
    const Node& node = impl_->nodes[i];
    Tensor out = impl_->evaluate(node, values);
    for (const auto& name : node.inputs) {
      auto it = impl_->last_use.find(name);
      if (it != impl_->last_use.end() && it->second == i && name != impl_->output) values.erase(name);
    }
    values.insert_or_assign(node.outputs.front(), std::move(out));
  }
  auto it = values.find(impl_->output);
  require(it != values.end(), ErrorCode::format, "graph output was not computed");
  return std::move(it->second);
}

}  // namespace wmatch::onnx
