#include "multinex/tensor.hpp"

// Tensor ops are header-only templates; this TU pins the header into the build
// so warnings surface even when no other source includes it yet.
namespace multinex {

template class TensorT<float>;
template class TensorT<double>;

} // namespace multinex
