#pragma once
// JSON serialization for spaces, morphisms, functor values, natural
// transformations, and decomposition certificates.  Every object carries a
// versioned "schema" field so downstream consumers can diff and validate.

#include "fquad/decomp.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace fquad::jio {

using nlohmann::json;

json matrix_to_json(const gf2::BitMat& m);
gf2::BitMat matrix_from_json(const json& j);

json space_to_json(const quad::QuadSpace& s);
json morphism_to_json(const tq::TqMorphism& t);
json value_to_json(const fn::FunctorValue& v);

// Components are keyed by the spaces' display names, in site order.
json transform_to_json(const fn::NatTransform& nt, const std::vector<quad::QuadSpace>& site);

// {schema, target, site, summands: [{name, functor, components: {space: matrix}}],
//  dims: [{space, dims}], verdict}
json certificate_to_json(const decomp::DecompCertificate& cert);

// Rebuilds the certificate from its serialized form: functors are resolved
// through the registry, injections are taken verbatim (never recomputed).
// The stored verdict is informational; run verify_certificate to refill the
// report.  Throws std::invalid_argument on malformed input.
decomp::DecompCertificate certificate_from_json(const json& j);

}  // namespace fquad::jio
