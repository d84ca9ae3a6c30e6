#pragma once

namespace pmaug {

/// Selects between the OpenMP kernel and its serial reference.
/// Both produce bitwise-identical results.
enum class ExecPolicy { kSerial, kParallel };

}  // namespace pmaug
