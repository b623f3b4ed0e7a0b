#include "fcdnet/wavelet.hpp"

#include "fcdnet/errors.hpp"

#include <string>

namespace fcdnet::signal {
namespace {

// Daubechies reconstruction lowpass filters, orders 1..8.
const std::vector<std::vector<double>>& daubechies_table() {
    static const std::vector<std::vector<double>> table = {
        {0.7071067811865476, 0.7071067811865476},
        {0.48296291314453416, 0.8365163037378079, 0.2241438680420134, -0.12940952255126037},
        {0.33267055295008263, 0.8068915093110925, 0.45987750211849154, -0.13501102001025458, -0.08544127388202666,
         0.03522629188570953},
        {0.2303778133088965, 0.7148465705529157, 0.6308807679298589, -0.027983769416859854, -0.18703481171909309,
         0.030841381835560764, 0.0328830116668852, -0.010597401785069032},
        {0.16010239797419293, 0.6038292697971896, 0.7243085284377729, 0.13842814590132074, -0.24229488706638203,
         -0.032244869584638375, 0.07757149384004572, -0.006241490212798274, -0.012580751999081999,
         0.0033357252854737712},
        {0.11154074335010947, 0.49462389039845306, 0.7511339080210954, 0.31525035170919763, -0.22626469396543983,
         -0.12976686756726194, 0.09750160558732304, 0.027522865530305727, -0.03158203931748603,
         0.0005538422011614961, 0.004777257510945511, -0.0010773010853084796},
        {0.07785205408500918, 0.3965393194819173, 0.7291320908462351, 0.4697822874051931, -0.14390600392856498,
         -0.22403618499387498, 0.07130921926683026, 0.08061260915108308, -0.03802993693501441,
         -0.01657454163066688, 0.01255099855609984, 0.0004295779729213665, -0.0018016407040474908,
         0.00035371379997452024},
        {0.05441584224310401, 0.31287159091429995, 0.6756307362972898, 0.5853546836542067, -0.015829105256349306,
         -0.2840155429615469, 0.0004724845739132828, 0.12874742662047847, -0.017369301001807547,
         -0.044088253930794755, 0.013981027917398282, 0.008746094047405777, -0.004870352993451574,
         -0.00039174037337694705, 0.0006754494064505693, -0.00011747678412476953},
    };
    return table;
}

} // namespace

Wavelet Wavelet::daubechies(int order) {
    const auto& table = daubechies_table();
    if (order < 1 || order > static_cast<int>(table.size())) {
        throw ContractError("wavelet: Daubechies order must be in [1, " + std::to_string(table.size()) + "], got " +
                            std::to_string(order));
    }
    const std::vector<double>& h = table[static_cast<std::size_t>(order - 1)];
    const std::size_t m = h.size();
    Wavelet w;
    w.order = order;
    w.dec_lo.resize(m);
    w.dec_hi.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        w.dec_lo[k] = h[m - 1 - k];
        w.dec_hi[k] = (k % 2 == 0 ? -1.0 : 1.0) * h[k];
    }
    return w;
}

// Analysis reads x[(2i + m/2 - k) mod n], matching the usual periodization convention.
void dwt_step(std::span<const double> x, const Wavelet& w, std::vector<double>& approx, std::vector<double>& detail) {
    const std::size_t n = x.size();
    if (n == 0 || n % 2 != 0) throw ContractError("dwt: periodized step needs an even, non-zero length");
    const std::size_t m = w.taps();
    const std::size_t half = n / 2;
    approx.assign(half, 0.0);
    detail.assign(half, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        double a = 0.0, d = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            // 2i + m/2 - k, shifted by a multiple of n to stay nonnegative.
            const std::size_t idx = (2 * i + m / 2 + m * n - k) % n;
            a += w.dec_lo[k] * x[idx];
            d += w.dec_hi[k] * x[idx];
        }
        approx[i] = a;
        detail[i] = d;
    }
}

std::vector<double> idwt_step(std::span<const double> approx, std::span<const double> detail, const Wavelet& w) {
    if (approx.size() != detail.size()) throw ContractError("idwt: approximation/detail length mismatch");
    const std::size_t half = approx.size();
    const std::size_t n = 2 * half;
    const std::size_t m = w.taps();
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t idx = (2 * i + m / 2 + m * n - k) % n;
            x[idx] += w.dec_lo[k] * approx[i] + w.dec_hi[k] * detail[i];
        }
    }
    return x;
}

Coeffs dwt_decompose(std::span<const double> x, const Wavelet& w, std::size_t depth) {
    const std::size_t n = x.size();
    const std::size_t block = std::size_t{1} << depth;
    if (n == 0 || n % block != 0) {
        const std::size_t lower = (n / block) * block;
        const std::size_t upper = lower + block;
        std::string hint = std::to_string(upper);
        if (lower > 0) hint = std::to_string(lower) + " or " + hint;
        throw ContractError("dwt: length " + std::to_string(n) + " is not divisible by 2^" + std::to_string(depth) +
                            " = " + std::to_string(block) + "; try a period of " + hint);
    }
    Coeffs details;
    std::vector<double> current(x.begin(), x.end());
    std::vector<double> approx, detail;
    for (std::size_t level = 0; level < depth; ++level) {
        dwt_step(current, w, approx, detail);
        details.push_back(detail);
        current = approx;
    }
    Coeffs out;
    out.push_back(current);
    for (std::size_t i = details.size(); i-- > 0;) out.push_back(details[i]);
    return out;
}

std::vector<double> dwt_reconstruct(const Coeffs& coeffs, const Wavelet& w) {
    if (coeffs.empty()) throw ContractError("dwt: no coefficient arrays");
    std::vector<double> current = coeffs[0];
    for (std::size_t i = 1; i < coeffs.size(); ++i) {
        if (coeffs[i].size() != current.size()) {
            throw ContractError("dwt: coefficient array " + std::to_string(i) + " has length " +
                                std::to_string(coeffs[i].size()) + ", expected " + std::to_string(current.size()));
        }
        current = idwt_step(current, coeffs[i], w);
    }
    return current;
}

Coeffs gate_coeffs(Coeffs coeffs, std::span<const double> gates) {
    if (gates.size() != coeffs.size()) {
        throw ContractError("gate_coeffs: " + std::to_string(gates.size()) + " gates for " +
                            std::to_string(coeffs.size()) + " coefficient arrays");
    }
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        for (double& c : coeffs[i]) c *= gates[i];
    return coeffs;
}

Tensor reconstruct_levels(const Coeffs& coeffs, const Wavelet& w) {
    if (coeffs.empty()) throw ContractError("reconstruct_levels: no coefficient arrays");
    const std::size_t levels = coeffs.size();
    Coeffs zeros;
    for (const auto& c : coeffs) zeros.emplace_back(c.size(), 0.0);
    std::vector<std::vector<double>> parts;
    for (std::size_t i = 0; i < levels; ++i) {
        Coeffs only = zeros;
        only[i] = coeffs[i];
        parts.push_back(dwt_reconstruct(only, w));
    }
    const std::size_t n = parts[0].size();
    Tensor out({n, levels});
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t l = 0; l < levels; ++l) out[t * levels + l] = parts[l][t];
    return out;
}

} // namespace fcdnet::signal
