"""Shared fixtures: three small application databases, each registered
into its own embedded search store.

The club database exercises browsing and drill-down links, the
university database exercises indirect joins, repeated values, and
vocabulary translation, and the department database exercises direct
two-relation queries plus recorded sort orders.
"""

from __future__ import annotations

import sqlite3
from dataclasses import dataclass

import pytest

from dbsearch.catalog import compute_paths, register_database
from dbsearch.config import Config
from dbsearch.parser import Interpretation, PathTerm
from dbsearch.pipeline import SearchService, register_and_save
from dbsearch.store import SqlGateway

from . import oracle


def interp_of(*terms) -> Interpretation:
    """An interpretation from bare terms; the score is irrelevant to
    planning and evaluation."""
    return Interpretation(terms=tuple(terms), score=0)


def tid_of(catalog, name: str) -> int:
    return next(t.table_id for t in catalog.tables if t.name == name)


def cid_of(catalog, tname: str, cname: str) -> int:
    tid = tid_of(catalog, tname)
    return next(c.column_id for c in catalog.columns_of(tid) if c.name == cname)


def term(catalog, tname: str, cname: str, value: str, negated: bool = False) -> PathTerm:
    return PathTerm(
        relation=tid_of(catalog, tname),
        attribute=cid_of(catalog, tname, cname),
        value=value,
        negated=negated,
    )

CLUB_DDL = (
    'create table "City" ("Code" text not null, "Location" text, primary key ("Code"))',
    'create table "Member" ("Name" text not null, "City" text, "Age" integer,'
    ' primary key ("Name"), foreign key ("City") references "City" ("Code"))',
    'create table "Activity" ("Name" text not null, "Sport" text not null,'
    ' primary key ("Name", "Sport"), foreign key ("Name") references "Member" ("Name"))',
)

CLUB_ROWS = {
    "City": [("BO-3492", "Illinois"), ("AT-7730", "Georgia")],
    "Member": [("John", "BO-3492", 15), ("Mary", "BO-3492", 22), ("Pat", "AT-7730", 31)],
    "Activity": [
        ("John", "Running"),
        ("John", "Biking"),
        ("Mary", "Running"),
        ("Pat", "Swimming"),
    ],
}

CLUB_YAML = """\
tables:
  Member:
    description: member
    columns:
      Name: {description: name, index: true}
      City: {description: city, index: true}
      Age: {description: age}
  Activity:
    description: activity
    columns:
      Name: {description: name, index: true}
      Sport: {description: sport, index: true}
  City:
    description: city
    columns:
      Code: {description: code, index: true}
      Location: {description: location, index: true}
"""

UNIVERSITY_DDL = (
    'create table "Dept" ("code" text not null, "dname" text, primary key ("code"))',
    'create table "Course" ("cno" text not null, "cname" text, "dept" text,'
    ' primary key ("cno"), foreign key ("dept") references "Dept" ("code"))',
    'create table "Student" ("sno" text not null, "sname" text, "status" text,'
    ' "gender" text, primary key ("sno"))',
    'create table "Study" ("sno" text not null, "cno" text not null,'
    ' primary key ("sno", "cno"),'
    ' foreign key ("sno") references "Student" ("sno"),'
    ' foreign key ("cno") references "Course" ("cno"))',
    'create table "Faculty" ("fid" text not null, "name" text, "dept" text,'
    ' primary key ("fid"))',
    'create table "Papers" ("pid" text not null, "fid" text not null, "area" text,'
    ' "title" text, primary key ("pid", "fid"),'
    ' foreign key ("fid") references "Faculty" ("fid"))',
)

UNIVERSITY_ROWS = {
    "Dept": [("CS", "Computer Science"), ("Math", "Mathematics")],
    "Course": [("C1", "DBMS", "CS"), ("C2", "Networks", "CS"), ("C3", "Algebra", "Math")],
    "Student": [
        ("S1", "Amit", "weak", "M"),
        ("S2", "Neha", "good", "F"),
        ("S3", "Ravi", "weak", "M"),
    ],
    "Study": [("S1", "C1"), ("S2", "C1"), ("S3", "C3"), ("S2", "C2")],
    "Faculty": [("F1", "Sudarshan", "CS"), ("F2", "Soumen", "CS"), ("F3", "Polle", "CS")],
    "Papers": [
        ("P1", "F1", "QueryOptimization", "Cost models revisited"),
        ("P1", "F2", "QueryOptimization", "Cost models revisited"),
        ("P2", "F1", "QueryOptimization", "Join ordering at scale"),
        ("P3", "F3", "DataMining", "Frequent patterns"),
        ("P4", "F2", "DBMS", "Storage layouts"),
    ],
}

UNIVERSITY_YAML = """\
tables:
  Student:
    description: student
    columns:
      sno: {description: student number, index: true}
      sname: {description: student name, index: true}
      status: {description: status, index: true}
      gender: {description: gender, index: true}
  Course:
    description: course
    columns:
      cno: {description: course number, index: true}
      cname: {description: course name, index: true}
      dept: {description: department, index: true}
  Study:
    description: study
    columns:
      sno: {description: student number, index: true}
      cno: {description: course number, index: true}
  Faculty:
    description: faculty
    columns:
      fid: {description: faculty id, index: true}
      name: {description: faculty name, index: true}
      dept: {description: department, index: true}
  Papers:
    description: paper
    columns:
      pid: {description: paper id, index: true}
      fid: {description: faculty id, index: true}
      area: {description: research area, index: true}
      title: {description: title, index: true}
  Dept:
    description: department
    columns:
      code: {description: code, index: true}
      dname: {description: department name, index: true}
vocabulary:
  - {external: female, internal: F, scope: value-code}
  - {external: male, internal: M, scope: value-code}
  - {external: students, internal: Student, scope: table-name}
code_tables:
  - {table: Dept, code: code, description: dname}
"""

DEPTEMP_DDL = (
    'create table "Dept" ("dno" integer not null, "dname" text, "city" text,'
    ' primary key ("dno"))',
    'create table "Emp" ("eno" integer not null, "ename" text, "salary" real,'
    ' "job" text, "dno" integer, primary key ("eno"),'
    ' foreign key ("dno") references "Dept" ("dno"))',
)

DEPTEMP_ROWS = {
    "Dept": [(1, "Sales", "London"), (2, "IT", "Paris"), (3, "HR", "London")],
    "Emp": [
        (1, "Anna", 5500.0, "Programmer", 1),
        (2, "Ben", 4200.0, "Clerk", 1),
        (3, "Cara", 6100.0, "Programmer", 2),
        (4, "Dev", 3900.0, "Programmer", 3),
        (5, "Eli", 4800.0, "Analyst", 3),
        (6, "Fay", 5100.0, "Clerk", 2),
    ],
}

DEPTEMP_YAML = """\
tables:
  Dept:
    description: department
    columns:
      dno: {description: number, index: true}
      dname: {description: name, index: true}
      city: {description: city, index: true}
  Emp:
    description: employee
    columns:
      eno: {description: number, index: true}
      ename: {description: name, index: true}
      salary: {description: salary}
      job: {description: job, index: true}
      dno: {description: department, index: true}
sort_orders:
  - {table: Emp, column: salary, direction: descending}
"""


def build_sqlite(path, ddl, rows) -> str:
    """Create a database file from DDL and row data; returns its URI."""
    conn = sqlite3.connect(path)
    try:
        for stmt in ddl:
            conn.execute(stmt)
        for table, data in rows.items():
            marks = ", ".join("?" for _ in data[0])
            conn.executemany(f'insert into "{table}" values ({marks})', data)
        conn.commit()
    finally:
        conn.close()
    return f"sqlite:///{path}"


@dataclass
class Deployment:
    """One registered database: file paths plus registration counts."""

    uri: str
    db_path: str
    ssdb_path: str
    annotations_path: str
    counts: dict


def deploy(tmp, name: str, ddl, rows, yaml_text: str) -> Deployment:
    db_path = tmp / f"{name}.db"
    ann_path = tmp / f"{name}.yaml"
    ssdb_path = tmp / f"{name}.ssdb"
    uri = build_sqlite(db_path, ddl, rows)
    ann_path.write_text(yaml_text, encoding="utf-8")
    counts = register_and_save(uri, str(ssdb_path), str(ann_path))
    return Deployment(
        uri=uri,
        db_path=str(db_path),
        ssdb_path=str(ssdb_path),
        annotations_path=str(ann_path),
        counts=counts,
    )


def _service(deployment: Deployment) -> SearchService:
    return SearchService.open(Config(uri=deployment.uri, ssdb=deployment.ssdb_path))


@pytest.fixture(scope="session")
def club_deploy(tmp_path_factory) -> Deployment:
    return deploy(tmp_path_factory.mktemp("club"), "club", CLUB_DDL, CLUB_ROWS, CLUB_YAML)


@pytest.fixture(scope="session")
def club_service(club_deploy):
    service = _service(club_deploy)
    yield service
    service.close()


@pytest.fixture(scope="session")
def university_deploy(tmp_path_factory) -> Deployment:
    return deploy(
        tmp_path_factory.mktemp("university"),
        "university",
        UNIVERSITY_DDL,
        UNIVERSITY_ROWS,
        UNIVERSITY_YAML,
    )


@pytest.fixture(scope="session")
def university_service(university_deploy):
    service = _service(university_deploy)
    yield service
    service.close()


@pytest.fixture(scope="session")
def deptemp_deploy(tmp_path_factory) -> Deployment:
    return deploy(
        tmp_path_factory.mktemp("deptemp"), "deptemp", DEPTEMP_DDL, DEPTEMP_ROWS, DEPTEMP_YAML
    )


@pytest.fixture(scope="session")
def deptemp_service(deptemp_deploy):
    service = _service(deptemp_deploy)
    yield service
    service.close()


def memory_db(service: SearchService) -> oracle.MemoryDb:
    return oracle.load_memory_db(service.gateway, service.catalog)


@pytest.fixture(scope="session")
def club_oracle(club_service) -> oracle.MemoryDb:
    return memory_db(club_service)


@pytest.fixture(scope="session")
def university_oracle(university_service) -> oracle.MemoryDb:
    return memory_db(university_service)


@pytest.fixture(scope="session")
def deptemp_oracle(deptemp_service) -> oracle.MemoryDb:
    return memory_db(deptemp_service)


@pytest.fixture()
def bare_catalog(tmp_path):
    """A club catalog registered without annotations, for metadata tests."""
    uri = build_sqlite(tmp_path / "bare.db", CLUB_DDL, CLUB_ROWS)
    gateway = SqlGateway(uri)
    catalog = compute_paths(register_database(gateway), max_hops=3)
    yield gateway, catalog
    gateway.dispose()
