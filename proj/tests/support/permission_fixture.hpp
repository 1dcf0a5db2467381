#pragma once

#include "oracles.hpp"

#include "metaforge/repository.hpp"

#include <map>
#include <string>

namespace metaforge::testing {

/// Three users (alice, bob, carol), two groups (lab = alice+bob, reviewers
/// = bob+carol) and four resources:
///   project   folder in alice's home, lab may read
///   protocol  template in project, reviewers may write
///   run       instance of protocol in project
///   shared    template in bob's home, everyone reads, alice writes
struct PermissionFixture {
  std::map<std::string, ResourceId> users;
  std::map<std::string, ResourceId> groups;
  std::map<std::string, ResourceId> nodes;  // resources plus homes and "root"
  AclWorld world;                           // the same setup, described by hand

  static PermissionFixture build(Repository& repo);
  static const std::vector<std::string>& resources();
};

Json minimal_template_json(const ResourceId& id, const std::string& name);

}  // namespace metaforge::testing
