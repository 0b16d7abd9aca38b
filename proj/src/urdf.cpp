// Copyright 2026 The chunkrt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "chunkrt/urdf.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include "chunkrt/errors.hpp"

namespace chunkrt {
namespace {

namespace pt = boost::property_tree;

bool contains_nocase(const std::string& haystack, const std::string& needle) {
  if (needle.empty()) return false;
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                        [](char a, char b) {
                          return std::tolower(static_cast<unsigned char>(a)) ==
                                 std::tolower(static_cast<unsigned char>(b));
                        });
  return it != haystack.end();
}

Vec3 parse_vec3(const std::string& text, const std::string& where) {
  std::istringstream is(text);
  Vec3 v;
  if (!(is >> v.x >> v.y >> v.z)) {
    throw UrdfError(UrdfError::Kind::kMalformedXml,
                    "cannot parse 3-vector in " + where + ": '" + text + "'");
  }
  return v;
}

std::string attr(const pt::ptree& node, const std::string& name,
                 const std::string& fallback = "") {
  return node.get<std::string>("<xmlattr>." + name, fallback);
}

struct RawJoint {
  std::string name;
  std::string type;
  std::string parent;
  std::string child;
  Vec3 axis{1, 0, 0};
  bool axis_given = false;
  Pose origin = Pose::identity();
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

UrdfParseResult parse_urdf(std::string_view xml, const UrdfOptions& opts) {
  pt::ptree doc;
  try {
    std::istringstream is{std::string(xml)};
    pt::read_xml(is, doc, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw UrdfError(UrdfError::Kind::kMalformedXml, e.what());
  }

  const auto robot_it = doc.find("robot");
  if (robot_it == doc.not_found()) {
    throw UrdfError(UrdfError::Kind::kMalformedXml, "missing <robot> root element");
  }
  const pt::ptree& robot = robot_it->second;

  UrdfParseResult result;
  result.chain.name = robot.get<std::string>("<xmlattr>.name", "robot");
  std::set<std::string> warned;
  auto warn = [&](const std::string& msg) {
    if (warned.insert(msg).second) result.warnings.push_back(msg);
  };

  std::map<std::string, int> link_index;
  std::vector<std::string> link_names;
  std::vector<RawJoint> raw_joints;

  for (const auto& [tag, node] : robot) {
    if (tag == "<xmlattr>") continue;
    if (tag == "link") {
      const std::string name = attr(node, "name");
      if (name.empty()) {
        throw UrdfError(UrdfError::Kind::kMalformedXml, "link without a name");
      }
      if (link_index.count(name)) {
        throw UrdfError(UrdfError::Kind::kMalformedXml, "duplicate link '" + name + "'");
      }
      link_index[name] = static_cast<int>(link_names.size());
      link_names.push_back(name);
      for (const auto& [child_tag, unused] : node) {
        (void)unused;
        if (child_tag != "<xmlattr>") warn("ignored element link/" + child_tag);
      }
    } else if (tag == "joint") {
      RawJoint rj;
      rj.name = attr(node, "name");
      rj.type = attr(node, "type", "fixed");
      if (rj.name.empty()) {
        throw UrdfError(UrdfError::Kind::kMalformedXml, "joint without a name");
      }
      for (const auto& [child_tag, child] : node) {
        if (child_tag == "<xmlattr>") continue;
        if (child_tag == "parent") {
          rj.parent = attr(child, "link");
        } else if (child_tag == "child") {
          rj.child = attr(child, "link");
        } else if (child_tag == "origin") {
          const std::string xyz = attr(child, "xyz", "0 0 0");
          const std::string rpy = attr(child, "rpy", "0 0 0");
          rj.origin.position = parse_vec3(xyz, "joint '" + rj.name + "' origin xyz");
          const Vec3 r = parse_vec3(rpy, "joint '" + rj.name + "' origin rpy");
          rj.origin.orientation = Quat::from_rpy(r.x, r.y, r.z);
        } else if (child_tag == "axis") {
          rj.axis = parse_vec3(attr(child, "xyz", "1 0 0"),
                               "joint '" + rj.name + "' axis");
          rj.axis_given = true;
        } else if (child_tag == "limit") {
          const std::string lo = attr(child, "lower");
          const std::string hi = attr(child, "upper");
          if (!lo.empty()) rj.lower = std::stod(lo);
          if (!hi.empty()) rj.upper = std::stod(hi);
          // effort / velocity attributes are ignored
        } else {
          warn("ignored element joint/" + child_tag);
        }
      }
      raw_joints.push_back(std::move(rj));
    } else {
      warn("ignored element robot/" + tag);
    }
  }

  // Resolve links and build the tree.
  struct Edge {
    int raw;
    int parent;
    int child;
  };
  std::vector<Edge> edges;
  std::vector<int> parent_joint_of_link(link_names.size(), -1);
  for (std::size_t i = 0; i < raw_joints.size(); ++i) {
    const RawJoint& rj = raw_joints[i];
    const auto pit = link_index.find(rj.parent);
    if (pit == link_index.end()) {
      throw UrdfError(UrdfError::Kind::kMissingLink,
                      "joint '" + rj.name + "' references undefined parent link '" +
                          rj.parent + "'");
    }
    const auto cit = link_index.find(rj.child);
    if (cit == link_index.end()) {
      throw UrdfError(UrdfError::Kind::kMissingLink,
                      "joint '" + rj.name + "' references undefined child link '" +
                          rj.child + "'");
    }
    if (parent_joint_of_link[cit->second] != -1) {
      throw UrdfError(UrdfError::Kind::kMalformedXml,
                      "link '" + rj.child + "' is the child of multiple joints");
    }
    parent_joint_of_link[cit->second] = static_cast<int>(i);
    edges.push_back({static_cast<int>(i), pit->second, cit->second});
  }

  std::vector<int> roots;
  for (std::size_t l = 0; l < link_names.size(); ++l) {
    if (parent_joint_of_link[l] == -1) roots.push_back(static_cast<int>(l));
  }
  if (roots.empty()) {
    throw UrdfError(UrdfError::Kind::kCycleDetected,
                    "every link has a parent; the joint graph contains a cycle");
  }
  if (roots.size() > 1) {
    std::string names;
    for (int r : roots) names += (names.empty() ? "" : ", ") + link_names[r];
    throw UrdfError(UrdfError::Kind::kMultipleRoots,
                    "multiple root links: " + names);
  }

  // Stable topological order: DFS from the root, siblings sorted by name.
  std::vector<std::vector<int>> out_edges(link_names.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    out_edges[edges[e].parent].push_back(static_cast<int>(e));
  }
  for (auto& outs : out_edges) {
    std::sort(outs.begin(), outs.end(), [&](int a, int b) {
      return raw_joints[edges[a].raw].name < raw_joints[edges[b].raw].name;
    });
  }

  std::vector<int> order;
  std::vector<char> link_seen(link_names.size(), 0);
  struct Visit {
    int link;
    std::size_t next_child = 0;
  };
  std::vector<Visit> visit{{roots[0]}};
  link_seen[roots[0]] = 1;
  while (!visit.empty()) {
    Visit& v = visit.back();
    if (v.next_child >= out_edges[v.link].size()) {
      visit.pop_back();
      continue;
    }
    const int edge_idx = out_edges[v.link][v.next_child++];
    const Edge& e = edges[edge_idx];
    if (link_seen[e.child]) {
      throw UrdfError(UrdfError::Kind::kCycleDetected,
                      "link '" + link_names[e.child] + "' is its own ancestor");
    }
    link_seen[e.child] = 1;
    order.push_back(edge_idx);
    visit.push_back({e.child});
  }
  if (order.size() != edges.size()) {
    throw UrdfError(UrdfError::Kind::kCycleDetected,
                    "joint graph is not connected to the root (cycle off the tree)");
  }

  KinematicChain& chain = result.chain;
  chain.links = link_names;
  chain.root_link = roots[0];
  for (int edge_idx : order) {
    const Edge& e = edges[edge_idx];
    const RawJoint& rj = raw_joints[e.raw];
    Joint joint;
    joint.name = rj.name;
    joint.origin = rj.origin;
    joint.lower = rj.lower;
    joint.upper = rj.upper;
    joint.parent_link = e.parent;
    joint.child_link = e.child;

    if (rj.type == "revolute") {
      joint.kind = JointKind::kRevolute;
    } else if (rj.type == "continuous") {
      joint.kind = JointKind::kRevolute;
    } else if (rj.type == "prismatic") {
      joint.kind = JointKind::kPrismatic;
    } else if (rj.type == "fixed") {
      joint.kind = JointKind::kFixed;
    } else {
      warn("joint '" + rj.name + "': unsupported type '" + rj.type +
           "' treated as fixed");
      joint.kind = JointKind::kFixed;
    }
    if (joint.kind != JointKind::kFixed &&
        contains_nocase(rj.name, opts.gripper_pattern)) {
      joint.kind = JointKind::kGripper;
    }
    if (joint.kind != JointKind::kFixed) {
      const double norm = rj.axis.norm();
      if (norm < 1e-12) {
        throw UrdfError(UrdfError::Kind::kMalformedXml,
                        "joint '" + rj.name + "' has a zero axis");
      }
      joint.axis = rj.axis * (1.0 / norm);
    }
    chain.joints.push_back(std::move(joint));
  }
  return result;
}

UrdfParseResult parse_urdf_file(const std::string& path, const UrdfOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open URDF file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_urdf(ss.str(), opts);
}

std::string serialize_urdf(const KinematicChain& chain) {
  std::ostringstream os;
  os << "<robot name=\"" << chain.name << "\">\n";
  for (const std::string& link : chain.links) {
    os << "  <link name=\"" << link << "\"/>\n";
  }
  for (const Joint& joint : chain.joints) {
    // Gripper joints slide along their axis; emit them as prismatic so the
    // document stays valid URDF. The name pattern restores the kind on parse.
    const char* type = joint.kind == JointKind::kGripper
                           ? "prismatic"
                           : joint_kind_name(joint.kind);
    os << "  <joint name=\"" << joint.name << "\" type=\"" << type << "\">\n";
    os << "    <parent link=\"" << chain.links[joint.parent_link] << "\"/>\n";
    os << "    <child link=\"" << chain.links[joint.child_link] << "\"/>\n";
    const Vec3& p = joint.origin.position;
    // Serialize orientation back to extrinsic XYZ angles via the rotation
    // matrix rows that matter: standard rpy extraction.
    const Quat& q = joint.origin.orientation;
    const double sinp = 2.0 * (q.w * q.y - q.z * q.x);
    const double pitch = std::abs(sinp) >= 1.0 ? std::copysign(M_PI / 2, sinp)
                                               : std::asin(sinp);
    const double roll =
        std::atan2(2.0 * (q.w * q.x + q.y * q.z), 1.0 - 2.0 * (q.x * q.x + q.y * q.y));
    const double yaw =
        std::atan2(2.0 * (q.w * q.z + q.x * q.y), 1.0 - 2.0 * (q.y * q.y + q.z * q.z));
    os << "    <origin xyz=\"" << fmt_double(p.x) << " " << fmt_double(p.y) << " "
       << fmt_double(p.z) << "\" rpy=\"" << fmt_double(roll) << " "
       << fmt_double(pitch) << " " << fmt_double(yaw) << "\"/>\n";
    if (joint.kind != JointKind::kFixed) {
      os << "    <axis xyz=\"" << fmt_double(joint.axis.x) << " "
         << fmt_double(joint.axis.y) << " " << fmt_double(joint.axis.z) << "\"/>\n";
      if (std::isfinite(joint.lower) || std::isfinite(joint.upper)) {
        os << "    <limit";
        if (std::isfinite(joint.lower)) os << " lower=\"" << fmt_double(joint.lower) << "\"";
        if (std::isfinite(joint.upper)) os << " upper=\"" << fmt_double(joint.upper) << "\"";
        os << "/>\n";
      }
    }
    os << "  </joint>\n";
  }
  os << "</robot>\n";
  return os.str();
}

std::string chain_to_json(const KinematicChain& chain) {
  nlohmann::json j;
  j["name"] = chain.name;
  j["root_link"] = chain.links.empty() ? "" : chain.links[chain.root_link];
  j["links"] = chain.links;
  j["njoints"] = chain.njoints();
  j["chain_hash"] = chain_hash(chain);
  nlohmann::json joints = nlohmann::json::array();
  for (const Joint& joint : chain.joints) {
    nlohmann::json node;
    node["name"] = joint.name;
    node["kind"] = joint_kind_name(joint.kind);
    node["axis"] = {joint.axis.x, joint.axis.y, joint.axis.z};
    node["origin"] = {
        {"position", {joint.origin.position.x, joint.origin.position.y,
                      joint.origin.position.z}},
        {"orientation", {joint.origin.orientation.w, joint.origin.orientation.x,
                         joint.origin.orientation.y, joint.origin.orientation.z}}};
    if (std::isfinite(joint.lower)) node["lower"] = joint.lower;
    if (std::isfinite(joint.upper)) node["upper"] = joint.upper;
    node["parent"] = chain.links[joint.parent_link];
    node["child"] = chain.links[joint.child_link];
    joints.push_back(node);
  }
  j["joints"] = joints;
  return j.dump(2);
}

}  // namespace chunkrt
