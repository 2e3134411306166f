#include "kljn/privacy.hpp"

#include <cmath>
#include <stdexcept>

namespace kljn::privacy {

void KeyMaterial::validate() const {
    if (!(eve_p >= 0.5 && eve_p <= 1.0))
        throw std::invalid_argument("KeyMaterial: eve_p must lie in [0.5, 1]");
    for (int b : bits)
        if (b != 0 && b != 1)
            throw std::invalid_argument("KeyMaterial: bits must be 0 or 1");
}

std::vector<int> xor_stage(const std::vector<int>& bits) {
    if (bits.size() < 2)
        throw std::invalid_argument("xor_stage: needs at least 2 bits");
    std::vector<int> out;
    out.reserve(bits.size() / 2);
    for (std::size_t i = 0; i + 1 < bits.size(); i += 2)
        out.push_back(bits[i] ^ bits[i + 1]);
    return out;
}

double predicted_p_after_stages(double p0, std::size_t stages) {
    if (!(p0 >= 0.5 && p0 <= 1.0))
        throw std::invalid_argument("predicted_p_after_stages: p0 must lie in [0.5, 1]");
    double p = p0;
    for (std::size_t s = 0; s < stages; ++s) p = p * p + (1.0 - p) * (1.0 - p);
    return p;
}

std::pair<KeyMaterial, AmplificationReport> amplify(const KeyMaterial& key,
                                                    std::size_t stages) {
    key.validate();
    if (stages > 62)
        throw std::invalid_argument("amplify: stages out of range");
    const std::size_t needed = std::size_t{1} << stages;
    if (key.bits.size() < needed)
        throw std::invalid_argument("amplify: key shorter than 2^stages bits");

    KeyMaterial out = key;
    for (std::size_t s = 0; s < stages; ++s) out.bits = xor_stage(out.bits);
    out.eve_p = predicted_p_after_stages(key.eve_p, stages);

    AmplificationReport rep;
    rep.stages = stages;
    rep.input_len = key.bits.size();
    rep.output_len = out.bits.size();
    rep.p_in = key.eve_p;
    rep.p_out = out.eve_p;
    rep.slowdown_factor = static_cast<double>(needed);
    const auto [eps, mi] = leak_metrics(out.eve_p);
    rep.epsilon = eps;
    rep.mutual_information_leak = mi;
    return {std::move(out), rep};
}

std::pair<double, double> leak_metrics(double p) {
    if (!(p >= 0.5 && p <= 1.0))
        throw std::invalid_argument("leak_metrics: p must lie in [0.5, 1]");
    const double q = 1.0 - p;
    double h2 = 0.0;
    if (p > 0.0) h2 -= p * std::log2(p);
    if (q > 0.0) h2 -= q * std::log2(q);
    return {p - 0.5, 1.0 - h2};
}

}  // namespace kljn::privacy
