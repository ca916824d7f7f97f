#pragma once

#include "escbundle/atlas.hpp"
#include "escbundle/bundle.hpp"
#include "escbundle/common.hpp"
#include "escbundle/driver.hpp"
#include "escbundle/graph.hpp"
#include "escbundle/instances.hpp"
#include "escbundle/operators.hpp"
#include "escbundle/sdp.hpp"
#include "escbundle/separation.hpp"
#include "escbundle/simplex_qp.hpp"
