#include "hmmdiv/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "hmmdiv/errors.hpp"

namespace hmmdiv {

using nlohmann::json;

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

const json& need(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) bad_key(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) bad_key(path + "." + key, "missing");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) bad_key(path, "expected a number");
  return v.get<double>();
}

template <class T>
T integer(const json& v, const std::string& path) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) bad_key(path, "expected an integer");
  if (v.is_number_integer() && v.get<long long>() < 0) bad_key(path, "must be nonnegative");
  return v.get<T>();
}

std::array<double, 2> pair(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) bad_key(path, "expected a two-element array");
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
}

double alpha_value(const json& v, const std::string& path) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "kl") return kKlAlpha;
    bad_key(path, "expected a number or \"kl\"");
  }
  const double a = number(v, path);
  if (!(a > 0.0)) bad_key(path, "alpha must be positive");
  return a;
}

json alpha_json(double a) { return routes_to_kl(a) ? json("kl") : json(a); }

ModelParams model_from_json(const json& v, Family family, const std::string& path) {
  if (!v.is_object()) bad_key(path, "expected an object");
  if (family == Family::A) {
    ModelAParams m;
    m.p00 = number(need(v, "p00", path), path + ".p00");
    m.p11 = number(need(v, "p11", path), path + ".p11");
    m.mu = pair(need(v, "mu", path), path + ".mu");
    m.psi = pair(need(v, "psi", path), path + ".psi");
    m.sigma = pair(need(v, "sigma", path), path + ".sigma");
    return m;
  }
  ModelBParams m;
  m.p01 = number(need(v, "p01", path), path + ".p01");
  m.p10 = number(need(v, "p10", path), path + ".p10");
  m.mu = pair(need(v, "mu", path), path + ".mu");
  m.phi = number(need(v, "phi", path), path + ".phi");
  m.psi1 = number(need(v, "psi1", path), path + ".psi1");
  m.psi2 = number(need(v, "psi2", path), path + ".psi2");
  m.sigma = number(need(v, "sigma", path), path + ".sigma");
  return m;
}

json model_to_json(const ModelParams& m) {
  if (const auto* a = std::get_if<ModelAParams>(&m))
    return {{"p00", a->p00}, {"p11", a->p11}, {"mu", a->mu}, {"psi", a->psi}, {"sigma", a->sigma}};
  const auto& b = std::get<ModelBParams>(m);
  return {{"p01", b.p01}, {"p10", b.p10}, {"mu", b.mu},     {"phi", b.phi},
          {"psi1", b.psi1}, {"psi2", b.psi2}, {"sigma", b.sigma}};
}

Family family_from_json(const json& v, const std::string& path) {
  if (v == "A") return Family::A;
  if (v == "B") return Family::B;
  bad_key(path, "expected \"A\" or \"B\"");
}

McConfig mc_from_json(const json& v, McConfig base, const std::string& path) {
  if (!v.is_object()) bad_key(path, "expected an object");
  for (auto it = v.begin(); it != v.end(); ++it) {
    const std::string key = path + "." + it.key();
    if (it.key() == "n") base.n = integer<std::size_t>(*it, key);
    else if (it.key() == "reps") base.reps = integer<std::size_t>(*it, key);
    else if (it.key() == "burn_in") base.burn_in = integer<std::size_t>(*it, key);
    else if (it.key() == "seed") base.seed = integer<std::uint64_t>(*it, key);
    else bad_key(key, "unknown key");
  }
  return base;
}

GridSpec grid_from_json(const json& v, GridSpec base, const std::string& path) {
  if (!v.is_object()) bad_key(path, "expected an object");
  for (auto it = v.begin(); it != v.end(); ++it) {
    const std::string key = path + "." + it.key();
    if (it.key() == "N") base.N = integer<int>(*it, key);
    else if (it.key() == "a") base.a = number(*it, key);
    else if (it.key() == "quad_points") base.quad_points = integer<int>(*it, key);
    else bad_key(key, "unknown key");
  }
  return base;
}

std::vector<double> alphas_from_json(const json& v, const std::string& path) {
  if (!v.is_array()) bad_key(path, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(alpha_value(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<ReferenceCell> reference_from_json(const json& v, std::size_t count,
                                               const std::string& path) {
  if (!v.is_object()) bad_key(path, "expected an object");
  auto column = [&](const char* key) {
    const json& col = need(v, key, path);
    const std::string p = path + "." + key;
    if (!col.is_array() || col.size() != count)
      bad_key(p, "expected " + std::to_string(count) + " values (one per alpha)");
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(number(col[i], p));
    return out;
  };
  const auto num = column("numerical"), sim = column("simulation"), sd = column("sd");
  std::vector<ReferenceCell> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = {num[i], sim[i], sd[i]};
  return out;
}

json case_to_json(const CaseSpec& c) {
  json alphas = json::array();
  for (double a : c.alphas) alphas.push_back(alpha_json(a));
  json j = {{"name", c.name},
            {"family", to_string(c.family())},
            {"theta1", model_to_json(c.theta1)},
            {"theta", model_to_json(c.theta)},
            {"alphas", alphas},
            {"mc", {{"n", c.mc.n}, {"reps", c.mc.reps}, {"burn_in", c.mc.burn_in}, {"seed", c.mc.seed}}},
            {"grid", {{"N", c.grid.N}, {"a", c.grid.a}, {"quad_points", c.grid.quad_points}}}};
  if (!c.reference.empty()) {
    json num = json::array(), sim = json::array(), sd = json::array();
    for (const auto& r : c.reference) {
      num.push_back(r.numerical);
      sim.push_back(r.simulation);
      sd.push_back(r.sd);
    }
    j["reference"] = {{"numerical", num}, {"simulation", sim}, {"sd", sd}};
  }
  return j;
}

// Top-level alphas/mc/grid act as defaults; each case may override them.
CaseSpec case_from_json(const json& v, const std::vector<double>& alphas, const McConfig& mc,
                        const GridSpec& grid, const std::string& path) {
  if (!v.is_object()) bad_key(path, "expected an object");
  CaseSpec c;
  const json& name = need(v, "name", path);
  if (!name.is_string()) bad_key(path + ".name", "expected a string");
  c.name = name.get<std::string>();
  const Family fam = family_from_json(need(v, "family", path), path + ".family");
  c.theta1 = model_from_json(need(v, "theta1", path), fam, path + ".theta1");
  c.theta = model_from_json(need(v, "theta", path), fam, path + ".theta");
  c.alphas = v.contains("alphas") ? alphas_from_json(v["alphas"], path + ".alphas") : alphas;
  c.mc = v.contains("mc") ? mc_from_json(v["mc"], mc, path + ".mc") : mc;
  c.grid = v.contains("grid") ? grid_from_json(v["grid"], grid, path + ".grid") : grid;
  if (v.contains("reference"))
    c.reference = reference_from_json(v["reference"], c.alphas.size(), path + ".reference");
  for (auto it = v.begin(); it != v.end(); ++it) {
    static const char* known[] = {"name", "family", "theta1", "theta", "alphas",
                                  "mc",   "grid",   "reference"};
    if (std::none_of(std::begin(known), std::end(known),
                     [&](const char* k) { return it.key() == k; }))
      bad_key(path + "." + it.key(), "unknown key");
  }
  return c;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

using Clock = std::chrono::steady_clock;

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string full(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void CaseSpec::validate() const {
  if (name.empty()) throw ConfigError("case name must be non-empty");
  if (theta1.index() != theta.index())
    throw ConfigError("case " + name + ": theta1 and theta must share a family");
  require_valid(theta1);
  require_valid(theta);
  if (alphas.empty()) throw ConfigError("case " + name + ": alphas must be non-empty");
  for (double a : alphas)
    if (!(a > 0.0)) throw ConfigError("case " + name + ": alphas must be positive");
  if (!reference.empty() && reference.size() != alphas.size())
    throw ConfigError("case " + name + ": reference needs one cell per alpha");
  mc.validate();
  grid.validate();
}

void StudyConfig::validate() const {
  if (cases.empty()) throw ConfigError("config key 'cases': must be non-empty");
  for (const auto& c : cases) c.validate();
}

StudyConfig parse_config(const std::string& json_text) {
  const json doc = parse_json(json_text);
  if (!doc.is_object()) bad_key("$", "expected an object");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (it.key() != "cases" && it.key() != "alphas" && it.key() != "mc" && it.key() != "grid")
      bad_key(it.key(), "unknown key");
  const std::vector<double> alphas =
      doc.contains("alphas") ? alphas_from_json(doc["alphas"], "alphas") : std::vector<double>{};
  const McConfig mc = doc.contains("mc") ? mc_from_json(doc["mc"], {}, "mc") : McConfig{};
  const GridSpec grid = doc.contains("grid") ? grid_from_json(doc["grid"], {}, "grid") : GridSpec{};
  const json& cases = need(doc, "cases", "$");
  if (!cases.is_array()) bad_key("cases", "expected an array");
  StudyConfig cfg;
  for (std::size_t i = 0; i < cases.size(); ++i)
    cfg.cases.push_back(
        case_from_json(cases[i], alphas, mc, grid, "cases[" + std::to_string(i) + "]"));
  cfg.validate();
  return cfg;
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const StudyConfig& cfg) {
  json cases = json::array();
  for (const auto& c : cfg.cases) cases.push_back(case_to_json(c));
  return json{{"cases", cases}}.dump(2) + "\n";
}

std::string serialize_case(const CaseSpec& spec) { return case_to_json(spec).dump(2); }

CaseSpec parse_case(const std::string& json_text) {
  CaseSpec c = case_from_json(parse_json(json_text), {}, {}, {}, "case");
  c.validate();
  return c;
}

StudyConfig paper_cases() {
  auto b = [](double p01, double p10, double m0, double m1, double phi, double psi2,
              double sigma) {
    return ModelBParams{p01, p10, {m0, m1}, phi, 1.0, psi2, sigma};
  };
  const std::vector<double> alphas{0.5, 0.8, 0.99, 0.999, kKlAlpha, 1.001, 1.01, 1.5, 2.0};

  struct Row {
    ModelBParams theta, theta1;
    // per alpha: numerical, simulation, sd
    double num[9], sim[9], sd[9];
  };
  const Row rows[8] = {
      {b(0.41, 0.6, 1, 0, 0, 0, 2), b(0.41, 0.6, 2, 1, 0, 0, 1.5),
       {.1091, .1533, .1762, .1772, .1773, .1774, .1784, .2248, .2601},
       {.1097, .1538, .1767, .1777, .1780, .1779, .1789, .2253, .2606},
       {.0145, .0114, .0101, .0101, .0101, .0101, .0100, .0081, .0069}},
      {b(0.41, 0.59, 1, 0, 0, 0, 2), b(0.41, 0.59, 2, 1, 0, 0, 1.6),
       {.0921, .1324, .1541, .1550, .1552, .1553, .1562, .2014, .2370},
       {.0927, .1329, .1546, .1555, .1558, .1557, .1567, .2019, .2374},
       {.0133, .0109, .0099, .0099, .0099, .0099, .0098, .0082, .0071}},
      {b(0.4, 0.59, 1, 0, 0, 0, 1), b(0.4, 0.59, 2, 1, 0, 0, 0.9),
       {.2196, .3372, .4072, .4104, .4108, .4112, .4144, .5807, .7330},
       {.2211, .3382, .4079, .4111, .4114, .4118, .4150, .5806, .7321},
       {.0214, .0191, .0184, .0184, .0184, .0184, .0184, .0178, .0181}},
      {b(0.4, 0.599, 1, 0, 0, 0, 1), b(0.4, 0.599, 2, 1, 0, 0, 0.9),
       {.2211, .3387, .4087, .4120, .4123, .4127, .4159, .5823, .7345},
       {.2220, .3395, .4094, .4127, .4129, .4134, .4166, .5828, .7348},
       {.0214, .0192, .0185, .0184, .0184, .0184, .0184, .0178, .0181}},
      {b(0.59, 0.4, 1, 0, 0, 0, 1), b(0.59, 0.4, 2, 1, 0, 0, 0.9),
       {.2225, .3366, .4032, .4063, .4066, .4069, .4100, .5650, .7054},
       {.2239, .3374, .4036, .4067, .4070, .4073, .4104, .5645, .7041},
       {.0217, .0189, .0180, .0180, .0179, .0179, .0179, .0171, .0174}},
      {b(0.599, 0.4, 1, 0, 0.2, 0, 1), b(0.599, 0.4, 2, 1, 0.3, 0, 1.1),
       {.2723, .4566, .5850, .5913, .5920, .5927, .5991, .9971, 1.5699},
       {.2733, .4575, .5857, .5921, .5928, .5935, .5999, .9967, 1.5548},
       {.0260, .0275, .0295, .0296, .0296, .0296, .0298, .0437, .1445}},
      {b(0.4, 0.59, 1, 0, 0.2, 0.2, 1.1), b(0.4, 0.59, 2, 1, 0.1, 0.1, 1),
       {.1227, .1939, .2363, .2382, .2386, .2387, .2406, .3418, .4364},
       {.1293, .1979, .2388, .2407, .2407, .2411, .2430, .3411, .4335},
       {.0150, .0131, .0124, .0123, .0123, .0123, .0123, .0113, .0114}},
      {b(0.4, 0.59, 1, 1, 0, 0, 1), b(0.4, 0.59, 2, 2, 0, 0, 0.9),
       {.2818, .4243, .5062, .5099, .5104, .5108, .5145, .6995, .8587},
       {.2826, .4250, .5068, .5105, .5106, .5113, .5151, .7000, .8590},
       {.0247, .0212, .0199, .0198, .0198, .0198, .0198, .0181, .0176}},
  };

  StudyConfig cfg;
  for (int i = 0; i < 8; ++i) {
    CaseSpec c;
    c.name = std::to_string(i + 1);
    c.theta1 = rows[i].theta1;
    c.theta = rows[i].theta;
    c.alphas = alphas;
    for (int k = 0; k < 9; ++k)
      c.reference.push_back({rows[i].num[k], rows[i].sim[k], rows[i].sd[k]});
    cfg.cases.push_back(std::move(c));
  }
  return cfg;
}

Methods parse_methods(const std::string& list) {
  Methods m{false, false};
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "mc") m.mc = true;
    else if (item == "fredholm") m.fredholm = true;
    else throw ConfigError("unknown method '" + item + "' (expected mc, fredholm)");
  }
  if (!m.mc && !m.fredholm) throw ConfigError("no methods selected");
  return m;
}

std::optional<double> ResultRow::relative_error_pct() const {
  if (!fredholm || !mc_mean || *mc_mean == 0.0) return std::nullopt;
  return (*fredholm - *mc_mean) / *mc_mean * 100.0;
}

std::vector<ResultRow> run_case(const CaseSpec& spec, const Methods& methods) {
  spec.validate();
  std::vector<ResultRow> rows(spec.alphas.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].case_name = spec.name;
    rows[i].alpha = spec.alphas[i];
  }
  if (methods.fredholm) {
    const auto results = divergence_fredholm_grid(spec.theta1, spec.theta, spec.alphas, spec.grid);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rows[i].fredholm = results[i].value;
      rows[i].fredholm_seconds = results[i].diagnostics.seconds;
      rows[i].diagnostics = results[i].diagnostics;
    }
  }
  if (methods.mc) {
    const auto start = Clock::now();
    const auto est =
        estimate_mc_grid(to_chain(spec.theta1), to_chain(spec.theta), spec.alphas, spec.mc);
    // Paths are shared across the alpha grid; charge each cell an equal share.
    const double per_cell = std::chrono::duration<double>(Clock::now() - start).count() /
                            static_cast<double>(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rows[i].mc_mean = est[i].mean;
      rows[i].mc_sd = est[i].std_dev;
      rows[i].mc_seconds = per_cell;
    }
  }
  return rows;
}

std::vector<ResultRow> run_study(const StudyConfig& cfg, const Methods& methods) {
  cfg.validate();
  std::vector<ResultRow> out;
  for (const auto& c : cfg.cases) {
    auto rows = run_case(c, methods);
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

std::vector<BandFailure> check_bands(const StudyConfig& cfg, const std::vector<ResultRow>& rows) {
  std::vector<BandFailure> out;
  for (const auto& c : cfg.cases) {
    for (std::size_t i = 0; i < c.alphas.size(); ++i) {
      const auto it = std::find_if(rows.begin(), rows.end(), [&](const ResultRow& r) {
        return r.case_name == c.name && r.alpha == c.alphas[i];
      });
      if (it == rows.end()) continue;
      const ResultRow& r = *it;
      auto fail = [&](const std::string& what) { out.push_back({c.name, r.alpha, what}); };
      if (r.fredholm && !std::isfinite(*r.fredholm)) fail("fredholm value not finite");
      if (r.mc_mean && !std::isfinite(*r.mc_mean)) fail("mc mean not finite");
      if (c.reference.empty()) continue;
      const ReferenceCell& ref = c.reference[i];
      if (r.fredholm) {
        const double band = std::max(0.01, 0.05 * std::abs(ref.numerical));
        if (std::abs(*r.fredholm - ref.numerical) > band)
          fail("fredholm " + fixed(*r.fredholm, 4) + " vs reference " + fixed(ref.numerical, 4) +
               " (band " + fixed(band, 4) + ")");
      }
      if (r.mc_mean && std::abs(*r.mc_mean - ref.simulation) > 3.0 * ref.sd)
        fail("mc " + fixed(*r.mc_mean, 4) + " vs reference " + fixed(ref.simulation, 4) +
             " (band " + fixed(3.0 * ref.sd, 4) + ")");
      if (r.fredholm && r.mc_mean && std::abs(*r.fredholm - *r.mc_mean) > 3.0 * ref.sd)
        fail("fredholm " + fixed(*r.fredholm, 4) + " vs mc " + fixed(*r.mc_mean, 4) +
             " (band " + fixed(3.0 * ref.sd, 4) + ")");
    }
  }
  return out;
}

std::string alpha_label(double alpha) {
  if (routes_to_kl(alpha)) return "KL";
  std::ostringstream os;
  os << alpha;
  return os.str();
}

// One block per alpha with the cases as columns, in the order rows arrive.
std::string format_table(const std::vector<ResultRow>& rows) {
  std::vector<std::string> cases;
  std::vector<double> alphas;
  std::map<std::pair<std::string, double>, const ResultRow*> cell;
  for (const auto& r : rows) {
    if (std::find(cases.begin(), cases.end(), r.case_name) == cases.end())
      cases.push_back(r.case_name);
    if (std::find(alphas.begin(), alphas.end(), r.alpha) == alphas.end()) alphas.push_back(r.alpha);
    cell[{r.case_name, r.alpha}] = &r;
  }
  constexpr int label_w = 14, col_w = 10;
  std::ostringstream os;
  os << std::left << std::setw(label_w) << "alpha / case" << std::right;
  for (const auto& c : cases) os << std::setw(col_w) << c;
  os << "\n";
  for (double a : alphas) {
    auto row = [&](const std::string& label, auto&& value) {
      os << std::left << std::setw(label_w) << label << std::right;
      for (const auto& c : cases) {
        auto it = cell.find({c, a});
        os << std::setw(col_w) << (it == cell.end() ? std::string() : value(*it->second));
      }
      os << "\n";
    };
    auto opt = [](const std::optional<double>& v, int digits) {
      return v ? fixed(*v, digits) : std::string();
    };
    os << "[" << alpha_label(a) << "]\n";
    row("Numerical", [&](const ResultRow& r) { return opt(r.fredholm, 4); });
    row("Simulation", [&](const ResultRow& r) { return opt(r.mc_mean, 4); });
    row("(sd)", [&](const ResultRow& r) { return opt(r.mc_sd, 4); });
    row("R.E. (%)", [&](const ResultRow& r) { return opt(r.relative_error_pct(), 2); });
    row("Time num (s)", [&](const ResultRow& r) {
      return r.fredholm ? fixed(r.fredholm_seconds, 2) : std::string();
    });
    row("Time sim (s)", [&](const ResultRow& r) {
      return r.mc_mean ? fixed(r.mc_seconds, 2) : std::string();
    });
  }
  return os.str();
}

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "case,alpha,fredholm,mc_mean,mc_sd,rel_error_pct,fredholm_seconds,mc_seconds\n";
  auto opt = [](const std::optional<double>& v) { return v ? full(*v) : std::string(); };
  for (const auto& r : rows) {
    os << r.case_name << "," << (routes_to_kl(r.alpha) ? "kl" : full(r.alpha)) << ","
       << opt(r.fredholm) << "," << opt(r.mc_mean) << "," << opt(r.mc_sd) << ","
       << opt(r.relative_error_pct()) << ","
       << (r.fredholm ? full(r.fredholm_seconds) : std::string()) << ","
       << (r.mc_mean ? full(r.mc_seconds) : std::string()) << "\n";
  }
  return os.str();
}

std::string format_diagnostics(const std::vector<ResultRow>& rows) {
  json cells = json::array();
  for (const auto& r : rows) {
    json c = {{"case", r.case_name}, {"alpha", alpha_json(r.alpha)}};
    if (r.diagnostics) {
      const auto& d = *r.diagnostics;
      c["fredholm"] = {{"eigen_residual", d.eigen_residual},
                       {"max_column_deviation", d.max_column_deviation},
                       {"iterations", d.iterations},
                       {"grid", {{"N", d.grid.N}, {"a", d.grid.a}, {"quad_points", d.grid.quad_points}}},
                       {"seconds", d.seconds}};
    }
    if (r.mc_mean) c["monte_carlo"] = {{"seconds", r.mc_seconds}};
    cells.push_back(c);
  }
  return json{{"cells", cells}}.dump(2) + "\n";
}

}  // namespace hmmdiv
