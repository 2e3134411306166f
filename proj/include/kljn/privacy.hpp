#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace kljn::privacy {

// A key plus the per-bit probability that an eavesdropper's best guess of
// each bit is correct (modeled i.i.d. across bits).
struct KeyMaterial {
    std::vector<int> bits;  // 0/1
    double eve_p = 0.5;

    void validate() const;
};

struct AmplificationReport {
    std::size_t stages = 0;
    std::size_t input_len = 0;
    std::size_t output_len = 0;
    double p_in = 0.5;
    double p_out = 0.5;
    double slowdown_factor = 1.0;  // 2^stages
    double epsilon = 0.0;          // p_out - 0.5
    double mutual_information_leak = 0.0;  // 1 - H2(p_out), bits per key bit
};

// One XOR pass: output[i] = bits[2i] ^ bits[2i+1]; an odd trailing bit is
// dropped. Requires length >= 2.
std::vector<int> xor_stage(const std::vector<int>& bits);

// Iterates p <- p^2 + (1-p)^2 s times: Eve gets an XOR bit right exactly
// when both or neither constituent guess is right.
double predicted_p_after_stages(double p0, std::size_t stages);

// Applies xor_stage `stages` times and accounts for the leak. Requires
// input_len >= 2^stages.
std::pair<KeyMaterial, AmplificationReport> amplify(const KeyMaterial& key,
                                                    std::size_t stages);

// (p - 0.5, 1 - H2(p)); both candidate leak measures are reported.
std::pair<double, double> leak_metrics(double p);

}  // namespace kljn::privacy
