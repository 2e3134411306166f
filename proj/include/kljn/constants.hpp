#pragma once

namespace kljn {

// Boltzmann constant, J/K (2019 SI exact value).
inline constexpr double k_boltzmann = 1.380649e-23;

}  // namespace kljn
