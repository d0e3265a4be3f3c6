#include "paratorus/snapshot.hpp"

#include <fstream>

namespace paratorus {

namespace {

void check_schema(const nlohmann::json& j, const char* kind) {
  if (!j.is_object() || j.value("schema_version", -1) != kSnapshotSchema || j.value("kind", "") != kind)
    throw DomainError(std::string("snapshot: expected ") + kind + " with schema_version " +
                      std::to_string(kSnapshotSchema));
}

}  // namespace

nlohmann::json field_to_json(const TorusField& u) {
  nlohmann::json j;
  j["schema_version"] = kSnapshotSchema;
  j["kind"] = "field";
  j["n"] = u.spec.n;
  j["M"] = u.spec.M;
  j["G"] = u.spec.G;
  j["shape"] = {u.shape.rows, u.shape.cols};
  j["parity"] = parity_name(u.parity);
  nlohmann::json c = nlohmann::json::array();
  for (const cplx& z : u.c) c.push_back({z.real(), z.imag()});
  j["coefficients"] = std::move(c);
  return j;
}

TorusField field_from_json(const nlohmann::json& j) {
  check_schema(j, "field");
  const GridSpec spec = GridSpec::make(j.at("n").get<int>(), j.at("M").get<int>(), j.at("G").get<int>());
  const Shape sh{j.at("shape").at(0).get<int>(), j.at("shape").at(1).get<int>()};
  TorusField u(spec, sh, parity_from_name(j.at("parity").get<std::string>()));
  const auto& c = j.at("coefficients");
  if (c.size() != u.c.size()) throw DomainError("snapshot: coefficient count does not match the grid");
  for (std::size_t i = 0; i < u.c.size(); ++i) u.c[i] = cplx(c[i].at(0).get<double>(), c[i].at(1).get<double>());
  return u;
}

nlohmann::json diffeo_to_json(const Diffeo& d) {
  nlohmann::json j;
  j["schema_version"] = kSnapshotSchema;
  j["kind"] = "diffeo";
  j["theta"] = field_to_json(d.theta);
  j["inverse_theta"] = d.inverse_theta ? field_to_json(*d.inverse_theta) : nlohmann::json(nullptr);
  j["lip"] = d.lip;
  return j;
}

Diffeo diffeo_from_json(const nlohmann::json& j) {
  check_schema(j, "diffeo");
  Diffeo d;
  d.theta = field_from_json(j.at("theta"));
  if (!j.at("inverse_theta").is_null()) d.inverse_theta = field_from_json(j.at("inverse_theta"));
  d.lip = j.at("lip").get<double>();
  return d;
}

nlohmann::json symbol_to_json(const GridSymbol& a) {
  nlohmann::json j;
  j["schema_version"] = kSnapshotSchema;
  j["kind"] = "symbol";
  j["n"] = a.spec.n;
  j["M"] = a.spec.M;
  j["G"] = a.spec.G;
  j["order"] = a.order;
  nlohmann::json v = nlohmann::json::array();
  for (const cplx& z : a.values) v.push_back({z.real(), z.imag()});
  j["values"] = std::move(v);
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return nlohmann::json::parse(in);
}

}  // namespace paratorus
