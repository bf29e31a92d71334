//! OpenAPI 3.1 description of the routes, built by hand to keep the
//! dependency list short. `docs/api.json` is this document, pretty-printed.

use serde_json::{json, Value};

fn body(schema: &str) -> Value {
    json!({
        "required": true,
        "content": { "application/json": { "schema": { "$ref": format!("#/components/schemas/{schema}") } } }
    })
}

fn reply(description: &str, schema: &str) -> Value {
    json!({
        "description": description,
        "content": { "application/json": { "schema": { "$ref": format!("#/components/schemas/{schema}") } } }
    })
}

fn error(description: &str) -> Value {
    reply(description, "Error")
}

fn sid() -> Value {
    json!({ "name": "sid", "in": "path", "required": true, "schema": { "type": "string" } })
}

fn vid() -> Value {
    json!({ "name": "vid", "in": "path", "required": true, "schema": { "type": "string" } })
}

/// A mutating operation: 201 with the stored views, plus the shared errors.
fn mutation(summary: &str, schema: &str, unsafe_possible: bool) -> Value {
    let mut responses = json!({
        "201": reply("Result stored; the response carries the full JSON of every new view", "Mutation"),
        "400": error("Malformed body or invalid arguments"),
        "404": error("Unknown session, view or table"),
        "409": error("`revision` does not match the session's current revision"),
    });
    responses["422"] = if unsafe_possible {
        error("Composition is unsafe; the body carries the safety verdict and its warnings")
    } else {
        error("The request is well formed but cannot be carried out")
    };
    json!({
        "summary": summary,
        "parameters": [sid()],
        "requestBody": body(schema),
        "responses": responses,
    })
}

fn operand_schema() -> Value {
    json!({
        "description": "A stored view or model id, a number (constant), or one tagged form.",
        "oneOf": [
            { "type": "string" },
            { "type": "number" },
            { "type": "object", "required": ["view"], "properties": { "view": { "type": "string" } } },
            { "type": "object", "required": ["constant"], "properties": { "constant": { "type": "number" } } },
            { "type": "object", "required": ["set"], "properties": { "set": { "type": "array", "items": { "$ref": "#/components/schemas/Operand" } } } },
            { "type": "object", "required": ["legend"], "properties": { "legend": {
                "type": "object", "required": ["view", "attr", "value"],
                "properties": { "view": { "type": "string" }, "attr": { "type": "string" }, "value": { "$ref": "#/components/schemas/Value" } } } } },
            { "type": "object", "required": ["marks"], "properties": { "marks": {
                "type": "object", "required": ["view", "predicate"],
                "properties": { "view": { "type": "string" }, "predicate": { "type": "string" } } } } },
            { "type": "object", "required": ["marks_of"], "properties": { "marks_of": { "type": "string" } } },
            { "type": "object", "required": ["cell"], "properties": { "cell": {
                "type": "object", "required": ["view", "key"],
                "properties": { "view": { "type": "string" }, "key": { "type": "object", "additionalProperties": { "$ref": "#/components/schemas/Value" } } } } } }
        ]
    })
}

fn schemas() -> Value {
    let revision = json!({ "type": "integer", "minimum": 0, "description": "Expected current revision; a mismatch is rejected with 409." });
    let kind =
        json!({ "type": "string", "enum": ["stat", "union", "viewset_stat", "viewset_union"], "default": "stat" });
    json!({
        "Value": {
            "description": "Attribute value: null, boolean, number, string, or {\"date\": \"YYYY-MM-DD\"}.",
            "oneOf": [
                { "type": "null" }, { "type": "boolean" }, { "type": "number" }, { "type": "string" },
                { "type": "object", "required": ["date"], "properties": { "date": { "type": "string", "format": "date" } } }
            ]
        },
        "Operand": operand_schema(),
        "CreateTable": {
            "type": "object", "required": ["name", "csv"], "additionalProperties": false,
            "properties": {
                "name": { "type": "string" },
                "csv": { "type": "string", "description": "CSV text with a header row" },
                "roles": { "type": "object", "additionalProperties": { "type": "string", "enum": ["dimension", "measure"] } },
                "revision": revision
            }
        },
        "CreateView": {
            "type": "object", "required": ["table", "group_attrs", "func", "attr"], "additionalProperties": false,
            "properties": {
                "table": { "type": "string" },
                "filter": { "type": "string", "description": "Predicate in script syntax, e.g. src = 'SFO'" },
                "group_attrs": { "type": "array", "items": { "type": "string" } },
                "func": { "type": "string", "enum": ["count", "sum", "avg", "min", "max", "std"] },
                "attr": { "type": "string" },
                "mark": { "type": "string", "enum": ["bar", "line", "point", "area", "text", "rect"] },
                "channels": { "type": "object", "additionalProperties": { "type": "string", "enum": ["x", "y", "color", "shape", "size", "column", "row", "detail"] } },
                "title": { "type": "string" },
                "revision": revision
            }
        },
        "Compose": {
            "type": "object", "required": ["left"], "additionalProperties": false,
            "properties": {
                "left": { "$ref": "#/components/schemas/Operand" },
                "right": { "$ref": "#/components/schemas/Operand" },
                "op": { "type": "string", "description": "-, +, *, / or an expression over y1 and y2 (stat); an aggregate name (viewset_stat, default avg)" },
                "kind": kind,
                "override": { "type": "boolean", "default": false },
                "revision": revision
            }
        },
        "Decompose": {
            "type": "object", "required": ["view", "kind"], "additionalProperties": false,
            "properties": {
                "view": { "type": "string" },
                "kind": { "type": "string", "enum": ["extract", "explode"] },
                "args": {
                    "type": "object", "additionalProperties": false,
                    "properties": {
                        "predicate": { "type": "string", "description": "extract: selection predicate; omitted means true" },
                        "attrs": { "type": "array", "items": { "type": "string" }, "description": "explode: attributes to split on" }
                    }
                },
                "revision": revision
            }
        },
        "Lift": {
            "type": "object", "required": ["view", "features"], "additionalProperties": false,
            "properties": {
                "view": { "type": "string" },
                "features": { "type": "array", "items": { "type": "string" } },
                "cond": { "type": "array", "items": { "type": "string" }, "default": [] },
                "revision": revision
            }
        },
        "Safety": {
            "type": "object", "required": ["left", "right"], "additionalProperties": false,
            "properties": {
                "left": { "$ref": "#/components/schemas/Operand" },
                "right": { "$ref": "#/components/schemas/Operand" },
                "kind": kind
            }
        },
        "Warning": {
            "type": "object", "required": ["code", "message"],
            "properties": { "code": { "type": "string" }, "message": { "type": "string" } }
        },
        "Verdict": {
            "type": "object", "required": ["status", "relationship", "matched", "dropped", "warnings"],
            "properties": {
                "status": { "type": "string", "enum": ["Safe", "Overridable", "Rejected"] },
                "relationship": { "type": ["string", "null"], "enum": ["Exact", "LeftSuperset", "Scalar", null] },
                "matched": { "type": "array", "items": { "type": "array", "items": { "type": "string" }, "minItems": 2, "maxItems": 2 } },
                "dropped": { "type": "array", "items": { "type": "string" } },
                "warnings": { "type": "array", "items": { "$ref": "#/components/schemas/Warning" } }
            }
        },
        "ViewObject": {
            "type": "object", "required": ["kind", "rows"],
            "description": "kind = view: {view: spec, rows}; kind = model: {model: fitted models, rows: sampled predictions}",
            "properties": {
                "kind": { "type": "string", "enum": ["view", "model"] },
                "view": { "type": "object" },
                "model": { "type": "object" },
                "rows": { "type": "array", "items": { "type": "object" } }
            }
        },
        "Mutation": {
            "type": "object", "required": ["revision", "dsl", "ids", "views"],
            "properties": {
                "revision": { "type": "integer" },
                "dsl": { "type": "string", "description": "The equivalent script statement" },
                "ids": { "type": "array", "items": { "type": "string" } },
                "views": { "type": "array", "items": { "$ref": "#/components/schemas/ViewObject" } },
                "view": { "$ref": "#/components/schemas/ViewObject" }
            }
        },
        "Data": {
            "type": "object", "required": ["id", "kind", "columns", "rows", "mark", "channels", "layout", "revision"],
            "properties": {
                "id": { "type": "string" },
                "kind": { "type": "string" },
                "title": { "type": "string" },
                "columns": { "type": "array", "items": { "type": "string" } },
                "rows": { "type": "array", "items": { "type": "object" } },
                "mark": { "type": "string" },
                "channels": { "type": "object", "additionalProperties": { "type": "string" } },
                "layout": { "type": ["string", "null"], "enum": ["superpose", "juxtapose", null] },
                "warnings": { "type": "array", "items": { "$ref": "#/components/schemas/Warning" } },
                "revision": { "type": "integer" }
            }
        },
        "Error": {
            "type": "object", "required": ["error"],
            "properties": { "error": {
                "type": "object", "required": ["code", "message"],
                "properties": {
                    "code": { "type": "string", "enum": ["validation", "not_found", "revision_conflict", "unsafe_composition", "unprocessable"] },
                    "message": { "type": "string" },
                    "verdict": { "$ref": "#/components/schemas/Verdict" },
                    "pairs": { "type": "array", "items": { "type": "object" } },
                    "warnings": { "type": "array", "items": { "$ref": "#/components/schemas/Warning" } },
                    "revision": { "type": "integer" }
                }
            } }
        }
    })
}

pub fn document() -> Value {
    json!({
        "openapi": "3.1.0",
        "info": {
            "title": "View composition service",
            "version": env!("CARGO_PKG_VERSION"),
            "description": "Session-scoped, in-memory view composition. GET requests never change a session's revision; every successful mutation increments it by one."
        },
        "servers": [{ "url": "http://127.0.0.1:8787" }],
        "paths": {
            "/sessions": {
                "post": {
                    "summary": "Create a session",
                    "responses": { "201": { "description": "Session id and revision 0", "content": { "application/json": { "schema": {
                        "type": "object", "properties": { "id": { "type": "string" }, "revision": { "type": "integer" } } } } } } }
                }
            },
            "/sessions/{sid}": {
                "get": {
                    "summary": "Session overview: revision, tables and stored view ids",
                    "parameters": [sid()],
                    "responses": { "200": { "description": "Overview" }, "404": error("Unknown session") }
                },
                "delete": {
                    "summary": "Drop a session and all its state",
                    "parameters": [sid()],
                    "responses": { "204": { "description": "Deleted" }, "404": error("Unknown session") }
                }
            },
            "/sessions/{sid}/tables": {
                "post": {
                    "summary": "Upload a CSV table. Send JSON, or text/csv with ?name=..&roles=col:measure",
                    "parameters": [sid(),
                        { "name": "name", "in": "query", "required": false, "schema": { "type": "string" } },
                        { "name": "roles", "in": "query", "required": false, "schema": { "type": "string" } },
                        { "name": "revision", "in": "query", "required": false, "schema": { "type": "integer" } }],
                    "requestBody": {
                        "required": true,
                        "content": {
                            "application/json": { "schema": { "$ref": "#/components/schemas/CreateTable" } },
                            "text/csv": { "schema": { "type": "string" } }
                        }
                    },
                    "responses": {
                        "201": { "description": "Table registered" },
                        "400": error("Malformed CSV or role map"),
                        "404": error("Unknown session"),
                        "409": error("Revision conflict")
                    }
                }
            },
            "/sessions/{sid}/views": {
                "get": {
                    "summary": "List stored views and models (specs without rows)",
                    "parameters": [sid()],
                    "responses": { "200": { "description": "Views in id order" }, "404": error("Unknown session") }
                },
                "post": mutation("Create a view from a table", "CreateView", false)
            },
            "/sessions/{sid}/views/{vid}": {
                "get": {
                    "summary": "Full view JSON with rows",
                    "parameters": [sid(), vid()],
                    "responses": { "200": reply("View or model", "ViewObject"), "404": error("Unknown session or view") }
                }
            },
            "/sessions/{sid}/views/{vid}/data": {
                "get": {
                    "summary": "Rows, visual mapping and layout hint",
                    "parameters": [sid(), vid()],
                    "responses": { "200": reply("Renderable data", "Data"), "404": error("Unknown session or view") }
                }
            },
            "/sessions/{sid}/compose": { "post": mutation("Compose two operands", "Compose", true) },
            "/sessions/{sid}/decompose": { "post": mutation("Extract marks from, or explode, a view", "Decompose", false) },
            "/sessions/{sid}/lift": { "post": mutation("Fit linear models over a view", "Lift", false) },
            "/sessions/{sid}/safety": {
                "post": {
                    "summary": "Check whether a composition is safe without performing it",
                    "parameters": [sid()],
                    "requestBody": body("Safety"),
                    "responses": {
                        "200": reply("Safety verdict", "Verdict"),
                        "400": error("Malformed body"),
                        "404": error("Unknown session or view")
                    }
                }
            },
            "/sessions/{sid}/script": {
                "get": {
                    "summary": "The session's composition steps as a script",
                    "parameters": [sid()],
                    "responses": { "200": { "description": "{revision, script}" }, "404": error("Unknown session") }
                }
            },
            "/docs/api.json": {
                "get": { "summary": "This document", "responses": { "200": { "description": "OpenAPI document" } } }
            }
        },
        "components": { "schemas": schemas() }
    })
}
