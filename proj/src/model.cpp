#include "cola/model.hpp"

namespace cola {

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "identity" || name == "linear") return Activation::identity;
  if (name == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

ReadoutMode parse_readout(std::string_view name) {
  if (name == "average" || name == "avg" || name == "mean") return ReadoutMode::average;
  if (name == "max") return ReadoutMode::max;
  if (name == "min") return ReadoutMode::min;
  if (name == "weighted_average" || name == "weighted") return ReadoutMode::weighted_average;
  throw std::invalid_argument("unknown readout '" + std::string(name) + "'");
}

std::string_view to_string(ReadoutMode m) {
  switch (m) {
    case ReadoutMode::average: return "average";
    case ReadoutMode::max: return "max";
    case ReadoutMode::min: return "min";
    case ReadoutMode::weighted_average: return "weighted_average";
  }
  return "?";
}

}  // namespace cola
