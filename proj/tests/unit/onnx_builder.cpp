#include "onnx_builder.hpp"

#include <cstring>

#include "onnx_subset.pb.h"

namespace onnx_builder {

std::string serialize(const Graph& g) {
  wmatch::onnx::ModelProto model;
  model.set_ir_version(7);
  auto* opset = model.add_opset_import();
  opset->set_version(13);
  auto* graph = model.mutable_graph();
  graph->set_name("test");
  graph->add_input()->set_name(g.input);
  for (const auto& [name, t] : g.initializers) {
    auto* init = graph->add_initializer();
    init->set_name(name);
    init->set_data_type(wmatch::onnx::TensorProto::FLOAT);
    for (auto d : t.shape) init->add_dims(d);
    if (g.raw_initializers) {
      std::string bytes(t.data.size() * sizeof(float), '\0');
      std::memcpy(bytes.data(), t.data.data(), bytes.size());
      init->set_raw_data(bytes);
    } else {
      for (float v : t.data) init->add_float_data(v);
    }
    graph->add_input()->set_name(name);
  }
  for (const auto& n : g.nodes) {
    auto* node = graph->add_node();
    node->set_op_type(n.op);
    node->set_name(n.output);
    for (const auto& in : n.inputs) node->add_input(in);
    node->add_output(n.output);
    for (const auto& a : n.attrs) {
      auto* attr = node->add_attribute();
      attr->set_name(a.name);
      if (a.is_float) {
        attr->set_type(wmatch::onnx::AttributeProto::FLOAT);
        attr->set_f(a.f);
      } else if (a.scalar) {
        attr->set_type(wmatch::onnx::AttributeProto::INT);
        attr->set_i(a.ints.at(0));
      } else {
        attr->set_type(wmatch::onnx::AttributeProto::INTS);
        for (auto v : a.ints) attr->add_ints(v);
      }
    }
  }
  graph->add_output()->set_name(g.output);
  return model.SerializeAsString();
}

}  // namespace onnx_builder
