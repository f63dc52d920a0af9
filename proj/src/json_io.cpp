#include "fquad/json_io.hpp"

#include "fquad/quad.hpp"

#include <stdexcept>
#include <utility>

namespace fquad::jio {

using fn::space_key;
using gf2::BitMat;
using quad::QuadSpace;

json matrix_to_json(const BitMat& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.to_string()}};
}

BitMat matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
        throw std::invalid_argument("matrix_from_json: expected {rows, cols, data}");
    return BitMat::from_string(j.at("rows").get<unsigned>(), j.at("cols").get<unsigned>(),
                               j.at("data").get<std::string>());
}

json space_to_json(const QuadSpace& s) {
    json out{{"schema", "fquad.space/1"},
             {"name", s.name()},
             {"dim", s.dim()},
             {"nondegenerate", quad::is_nondegenerate(s)}};
    out["radical_dim"] = quad::radical(s).dim();
    if (quad::is_nondegenerate(s) && s.dim() > 0)
        out["arf"] = quad::arf(s) ? 1 : 0;
    else
        out["arf"] = nullptr;
    return out;
}

json morphism_to_json(const tq::TqMorphism& t) {
    json out{{"schema", "fquad.morphism/1"},
             {"source", t.source().name()},
             {"target", t.target().name()},
             {"a", matrix_to_json(t.a())},
             {"rank", t.rank()}};
    out["k"] = t.rank() == 0 ? json(nullptr) : json(t.k().basis().to_string());
    return out;
}

json value_to_json(const fn::FunctorValue& v) {
    return json{{"schema", "fquad.value/1"},
                {"space", v.space},
                {"dim", v.dim()},
                {"labels", v.labels}};
}

json transform_to_json(const fn::NatTransform& nt, const std::vector<QuadSpace>& site) {
    json comps = json::object();
    for (const auto& s : site) comps[s.name()] = matrix_to_json(nt.at(s));
    return json{{"schema", "fquad.transform/1"},
                {"from", nt.from->name()},
                {"to", nt.to->name()},
                {"components", comps}};
}

json certificate_to_json(const decomp::DecompCertificate& cert) {
    json site = json::array();
    for (const auto& s : cert.site) site.push_back(s.name());
    json summands = json::array();
    for (const auto& sm : cert.summands) {
        json comps = json::object();
        for (const auto& s : cert.site) comps[s.name()] = matrix_to_json(sm.injection.at(s));
        summands.push_back(
            json{{"name", sm.name}, {"functor", sm.functor->name()}, {"components", comps}});
    }
    json dims = json::array();
    for (const auto& [space, row] : cert.report.dims)
        dims.push_back(json{{"space", space}, {"dims", row}});
    std::string verdict = cert.report.ok ? "verified"
                          : cert.report.detail.empty() ? "unverified"
                                                       : "failed: " + cert.report.detail;
    return json{{"schema", "fquad.certificate/1"}, {"target", cert.target},
                {"site", site},                    {"summands", summands},
                {"dims", dims},                    {"verdict", verdict}};
}

decomp::DecompCertificate certificate_from_json(const json& j) {
    if (!j.is_object() || j.value("schema", "") != "fquad.certificate/1")
        throw std::invalid_argument("certificate_from_json: unexpected schema");
    decomp::DecompCertificate cert;
    cert.target = j.at("target").get<std::string>();
    fn::FunctorPtr target = fn::parse_functor(cert.target);
    for (const auto& name : j.at("site")) cert.site.push_back(QuadSpace::parse(name.get<std::string>()));
    for (const auto& sj : j.at("summands")) {
        decomp::Summand sm;
        sm.name = sj.at("name").get<std::string>();
        sm.functor = fn::parse_functor(sj.at("functor").get<std::string>());
        sm.injection.from = sm.functor;
        sm.injection.to = target;
        const json& comps = sj.at("components");
        for (const auto& s : cert.site) {
            auto it = comps.find(s.name());
            if (it == comps.end())
                throw std::invalid_argument("certificate_from_json: missing component at " + s.name());
            sm.injection.comp.emplace(space_key(s), matrix_from_json(*it));
        }
        cert.summands.push_back(std::move(sm));
    }
    cert.report.ok = j.value("verdict", "") == "verified";
    cert.report.detail = j.value("verdict", "");
    return cert;
}

}  // namespace fquad::jio
