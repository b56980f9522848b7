#include "logcorr/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "logcorr/errors.hpp"
#include "logcorr/sampler.hpp"

namespace logcorr {

Functional constant_functional(double c) {
  if (!std::isfinite(c)) throw ValidationError("constant functional needs a finite value");
  return {"constant", std::abs(c), false, [c](const FunctionalArg&) { return c; }};
}

Functional endpoint_indicator(double level) {
  return {"endpoint_indicator", 1.0, false, [level](const FunctionalArg& arg) {
            if (arg.path.empty()) throw ValidationError("endpoint indicator needs a path argument");
            return arg.path.back() <= level ? 1.0 : 0.0;
          }};
}

Functional sum(const Functional& a, const Functional& b) {
  return {a.name + "+" + b.name, a.bound + b.bound, a.needs_field || b.needs_field,
          [a, b](const FunctionalArg& arg) { return a(arg) + b(arg); }};
}

UnitGrid UnitGrid::make(int d, int n) {
  if (d < 1 || d > 2) throw ValidationError("unit grid dimension must be 1 or 2");
  if (n < 3 || n % 2 == 0) throw ValidationError("unit grid needs an odd n >= 3");
  UnitGrid g;
  g.d = d;
  g.n = n;
  const double h = 2.0 / (n - 1);
  std::vector<double> axis(n), w(n);
  for (int i = 0; i < n; ++i) {
    axis[i] = -1.0 + h * i;
    w[i] = (i == 0 || i == n - 1) ? 0.5 * h : h;
  }
  if (d == 1) {
    for (int i = 0; i < n; ++i) {
      g.points.push_back({axis[i], 0.0});
      g.weights.push_back(w[i]);
    }
    g.centre = static_cast<std::size_t>(n / 2);
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        g.points.push_back({axis[i], axis[j]});
        g.weights.push_back(w[i] * w[j]);
      }
    }
    g.centre = static_cast<std::size_t>((n / 2) * n + n / 2);
  }
  return g;
}

namespace {

// Field samples Y_b on the unit grid started at 0, with the running max at the centre.
struct FieldBank {
  UnitGrid grid;
  std::vector<double> values;  // samples x points
  std::vector<double> centre_max;
};

}  // namespace

Functional flb_functional(const KernelSpec& kernel, const FlbConfig& config) {
  if (!(config.b > 0.0) || !std::isfinite(config.L)) throw ValidationError("F_{L,b} needs b > 0 and finite L");
  if (config.inner_samples == 0) throw ValidationError("F_{L,b} needs inner samples");
  auto bank = std::make_shared<FieldBank>();
  bank->grid = UnitGrid::make(kernel.dimension(), config.n);
  const std::size_t size = bank->grid.points.size();

  const FieldSampler sampler(kernel, GridSpec{kernel.dimension(), 2.0, config.n}, config.delta);
  sampler.prepare(config.b);
  bank->values.resize(config.inner_samples * size);
  bank->centre_max.resize(config.inner_samples);
  for (std::size_t k = 0; k < config.inner_samples; ++k) {
    FieldState state = sampler.initial_state(config.seed, k);
    double top = 0.0;
    while (state.t < config.b - 1e-9) {
      const double next = std::min(state.t + config.delta, config.b);
      sampler.advance_to(state, next);
      top = std::max(top, state.values[bank->grid.centre]);
    }
    std::copy(state.values.begin(), state.values.end(), bank->values.begin() + static_cast<std::ptrdiff_t>(k * size));
    bank->centre_max[k] = top;
  }

  const double root = std::sqrt(2.0 * kernel.dimension());
  const double L = config.L;
  return {"flb", std::numeric_limits<double>::infinity(), true, [bank, root, L, size](const FunctionalArg& arg) {
            if (arg.field.size() != size) throw ValidationError("F_{L,b} field argument has the wrong size");
            const double x = arg.x;
            const std::size_t c = bank->grid.centre;
            double total = 0.0;
            for (std::size_t k = 0; k < bank->centre_max.size(); ++k) {
              const double* y = bank->values.data() + k * size;
              if (x + bank->centre_max[k] > 0.0 || x + y[c] < -L - 1.0) continue;
              bool reached = false;
              double volume = 0.0;
              for (std::size_t j = 0; j < size; ++j) {
                const double v = x + y[j];
                if (v >= -L - arg.field[j]) reached = true;
                if (v >= -L - 1.0 - arg.field[j]) volume += bank->grid.weights[j];
              }
              if (reached) total += 1.0 / volume;
            }
            return std::exp(-root * (x + L)) * total / static_cast<double>(bank->centre_max.size());
          }};
}

Functional make_functional(const std::string& name, const std::map<std::string, double>& params,
                           const KernelSpec& kernel) {
  const auto get = [&](const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "constant") return constant_functional(get("value", 1.0));
  if (name == "endpoint_indicator") return endpoint_indicator(get("level", -0.5));
  if (name == "flb") {
    FlbConfig c;
    c.L = get("L", c.L);
    c.b = get("b", c.b);
    c.n = static_cast<int>(get("n", c.n));
    c.inner_samples = static_cast<std::size_t>(get("inner_samples", static_cast<double>(c.inner_samples)));
    c.delta = get("delta", c.delta);
    c.seed = static_cast<std::uint64_t>(get("seed", static_cast<double>(c.seed)));
    return flb_functional(kernel, c);
  }
  throw ValidationError("unknown functional '" + name + "' (expected constant, endpoint_indicator or flb)");
}

}  // namespace logcorr
