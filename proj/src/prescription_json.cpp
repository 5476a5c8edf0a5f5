#include "aberrasim/io/prescription_json.hpp"

#include "aberrasim/io/io_error.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace aberrasim {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument(context + ": unknown field \"" + it.key() +
                                  "\"");
}

double require_number(const json& obj, const std::string& key,
                      const std::string& context) {
  if (!obj.contains(key))
    throw std::invalid_argument(context + ": missing field \"" + key + "\"");
  if (!obj[key].is_number())
    throw std::invalid_argument(context + "." + key + ": must be a number");
  return obj[key].get<double>();
}

SurfaceKind parse_kind(const std::string& s, const std::string& context) {
  if (s == "spherical") return SurfaceKind::Spherical;
  if (s == "aspheric") return SurfaceKind::Aspheric;
  if (s == "stop") return SurfaceKind::Stop;
  if (s == "image_plane") return SurfaceKind::ImagePlane;
  throw std::invalid_argument(
      context + ".type: must be one of spherical, aspheric, stop, image_plane");
}

const char* kind_name(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::Spherical: return "spherical";
    case SurfaceKind::Aspheric: return "aspheric";
    case SurfaceKind::Stop: return "stop";
    case SurfaceKind::ImagePlane: return "image_plane";
  }
  return "spherical";
}

}  // namespace

LensPrescription<double> parse_prescription(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("prescription: invalid JSON: ") +
                                e.what());
  }
  if (!doc.is_object())
    throw std::invalid_argument("prescription: root must be an object");
  reject_unknown(doc,
                 {"surfaces", "stop_index", "wavelengths", "object_distance",
                  "pixel_pitch"},
                 "prescription");
  if (!doc.contains("surfaces") || !doc["surfaces"].is_array())
    throw std::invalid_argument("surfaces: required array");
  if (!doc.contains("stop_index") || !doc["stop_index"].is_number_integer())
    throw std::invalid_argument("stop_index: required integer");
  if (!doc.contains("wavelengths") || !doc["wavelengths"].is_array())
    throw std::invalid_argument("wavelengths: required array");

  LensPrescription<double> p;
  p.stop_index = doc["stop_index"].get<int>();
  if (doc.contains("object_distance"))
    p.object_distance = require_number(doc, "object_distance", "prescription");
  if (doc.contains("pixel_pitch"))
    p.pixel_pitch = require_number(doc, "pixel_pitch", "prescription");

  int si = 0;
  for (const auto& js : doc["surfaces"]) {
    const std::string ctx = "surfaces[" + std::to_string(si) + "]";
    if (!js.is_object())
      throw std::invalid_argument(ctx + ": must be an object");
    reject_unknown(js,
                   {"type", "curvature", "aspheric", "semi_diameter",
                    "thickness", "index"},
                   ctx);
    if (!js.contains("type") || !js["type"].is_string())
      throw std::invalid_argument(ctx + ".type: required string");
    Surface<double> s;
    s.kind = parse_kind(js["type"].get<std::string>(), ctx);
    if (js.contains("curvature"))
      s.curvature = require_number(js, "curvature", ctx);
    if (js.contains("semi_diameter"))
      s.semi_diameter = require_number(js, "semi_diameter", ctx);
    if (js.contains("thickness"))
      s.thickness = require_number(js, "thickness", ctx);
    if (js.contains("aspheric")) {
      if (!js["aspheric"].is_object())
        throw std::invalid_argument(ctx + ".aspheric: must be a map");
      for (auto it = js["aspheric"].begin(); it != js["aspheric"].end(); ++it) {
        int order = 0;
        try {
          size_t pos = 0;
          order = std::stoi(it.key(), &pos);
          if (pos != it.key().size()) throw std::invalid_argument("");
        } catch (...) {
          throw std::invalid_argument(ctx + ".aspheric: order \"" + it.key() +
                                      "\" is not an integer");
        }
        if (!it.value().is_number())
          throw std::invalid_argument(ctx + ".aspheric[" + it.key() +
                                      "]: must be a number");
        s.aspheric.emplace_back(order, it.value().get<double>());
      }
      std::sort(s.aspheric.begin(), s.aspheric.end());
    }
    if (js.contains("index")) {
      if (!js["index"].is_object())
        throw std::invalid_argument(ctx + ".index: must be a map");
      for (auto it = js["index"].begin(); it != js["index"].end(); ++it) {
        double nm = 0;
        try {
          size_t pos = 0;
          nm = std::stod(it.key(), &pos);
          if (pos != it.key().size()) throw std::invalid_argument("");
        } catch (...) {
          throw std::invalid_argument(ctx + ".index: wavelength \"" +
                                      it.key() + "\" is not a number");
        }
        if (!it.value().is_number())
          throw std::invalid_argument(ctx + ".index[" + it.key() +
                                      "]: must be a number");
        s.index_after.emplace_back(nm, it.value().get<double>());
      }
      std::sort(s.index_after.begin(), s.index_after.end());
    }
    p.surfaces.push_back(std::move(s));
    ++si;
  }

  int wi = 0;
  for (const auto& jw : doc["wavelengths"]) {
    const std::string ctx = "wavelengths[" + std::to_string(wi) + "]";
    if (!jw.is_object())
      throw std::invalid_argument(ctx + ": must be an object");
    reject_unknown(jw, {"nm", "channel", "weight"}, ctx);
    DesignWavelength<double> w;
    w.nm = require_number(jw, "nm", ctx);
    if (!jw.contains("channel") || !jw["channel"].is_number_integer())
      throw std::invalid_argument(ctx + ".channel: required integer");
    w.channel = jw["channel"].get<int>();
    w.weight = require_number(jw, "weight", ctx);
    p.wavelengths.push_back(w);
    ++wi;
  }

  validate(p);
  return p;
}

LensPrescription<double> load_prescription(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_prescription: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_prescription(ss.str());
}

std::string prescription_to_json(const LensPrescription<double>& p) {
  json doc;
  doc["stop_index"] = p.stop_index;
  doc["object_distance"] = p.object_distance;
  doc["pixel_pitch"] = p.pixel_pitch;
  doc["surfaces"] = json::array();
  for (const auto& s : p.surfaces) {
    json js;
    js["type"] = kind_name(s.kind);
    js["curvature"] = s.curvature;
    js["semi_diameter"] = s.semi_diameter;
    js["thickness"] = s.thickness;
    if (!s.aspheric.empty()) {
      json ja = json::object();
      for (const auto& [order, coeff] : s.aspheric)
        ja[std::to_string(order)] = coeff;
      js["aspheric"] = ja;
    }
    if (!s.index_after.empty()) {
      json ji = json::object();
      for (const auto& [nm, n] : s.index_after) {
        std::ostringstream key;
        key << nm;
        ji[key.str()] = n;
      }
      js["index"] = ji;
    }
    doc["surfaces"].push_back(js);
  }
  doc["wavelengths"] = json::array();
  for (const auto& w : p.wavelengths)
    doc["wavelengths"].push_back(
        {{"nm", w.nm}, {"channel", w.channel}, {"weight", w.weight}});
  return doc.dump(2) + "\n";
}

}  // namespace aberrasim
