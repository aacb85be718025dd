#ifndef KINESIM_SERIALIZATION_HPP_
#define KINESIM_SERIALIZATION_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kinesim/scene.hpp"

namespace kinesim {

using Json = nlohmann::json;

/// Canonical bytes of a document: sorted keys, no whitespace, shortest
/// round-trip numbers, matrices as 16 row-major numbers.
std::string to_json(const SceneDocument& doc);

/// Throws VersionError for a foreign "_version" and SchemaError (with the
/// offending field path) for anything else that does not fit.
SceneDocument from_json(std::string_view bytes);

/// Tree form of `to_json`, for embedding a document in other messages.
Json document_value(const SceneDocument& doc);
SceneDocument document_from_value(const Json& value);

/// Canonical writer for any JSON value (same rules as `to_json`).
/// '<', '>' and '&' are written as \u escapes so the output can sit inside
/// an HTML script element unchanged.
std::string write_canonical(const Json& value);
/// Shortest decimal that parses back to `v`; -0 is written as 0.
std::string format_number(double v);

Json htm_value(const Htm& h);
Htm htm_from_value(const Json& v, const std::string& path);
Json vec_value(const VecX& v);
VecX vec_from_value(const Json& v, const std::string& path);

/// Single self-contained page: the document in a
/// <script type="application/json" id="kinesim-doc"> block plus the viewer
/// bundle inlined in a plain <script>.
std::string export_html(const SceneDocument& doc, std::string_view viewer_bundle);
/// The JSON text held in the data block of an exported page.
std::string embedded_document(std::string_view html);

/// Places where a page would load something over the network: src/href
/// attributes, CSS url() and @import, and JS imports or fetches pointing at
/// absolute or protocol-relative URLs. Empty for a self-contained page.
std::vector<std::string> find_external_references(std::string_view html);

/// Minimal canvas viewer compiled into the library, used when no bundle of
/// the full viewer is supplied.
std::string_view fallback_viewer_bundle();

/// "ball:R", "box:W:H:D", "cylinder:R:H", "cone:R:H" or "frame:L".
Shape parse_shape_spec(std::string_view spec);

/// Header `t,id,x,y,z` or `t,id,x,y,z,qw,qx,qy,qz`. One object per id, one
/// pose key per row. Errors carry the 1-based line number.
SceneDocument import_trajectory_csv(std::string_view bytes, const Shape& shape = Ball{0.1});

}  // namespace kinesim

#endif  // KINESIM_SERIALIZATION_HPP_
