"""Known trigger programs, transcribed into the IR.

Each :class:`Fixture` pairs a program with the compiler split it is known to
cause: the language whose compiler was varied, which side of the pair
rejects, and the diagnostic it printed. ``mock_rules`` turns that into rule
files for :mod:`xlangfuzz.mockc`, where the buggy side only misbehaves when
the source contains the construct the bug depends on, so that a reduced or
repaired variant (see ``fig7b``) compiles cleanly on both sides.

Two listings use constructs the IR cannot express (a Java raw type, Kotlin's
``Nothing``); they are kept as raw source in :data:`RAW_SOURCES`.

Fixture names keep the identifiers of the original listings, including
``Child``/``ITop``-style names, so they are not all from the generator's
name pools.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ir import (
    STRING,
    TOP,
    UNIT,
    ClassType,
    IrProgram,
    Kind,
    Lang,
    MethodDecl,
    MethodKind,
    MethodRef,
    Modifier,
    ParamDecl,
    SuperTypeRef,
    TypeDecl,
    TypeParam,
    TypeRef,
)

J, K, G, S = Lang.JAVA, Lang.KOTLIN, Lang.GROOVY, Lang.SCALA
ABSTRACT, NORMAL, FINAL = MethodKind.ABSTRACT, MethodKind.NORMAL, MethodKind.FINAL


def _iface(name, lang, *, tparams=(), supers=(), methods=()):
    return TypeDecl(name, Kind.INTERFACE, lang, Modifier.ABSTRACT, tuple(tparams), tuple(supers), tuple(methods))


def _cls(name, lang, modifier=Modifier.OPEN, *, tparams=(), supers=(), methods=()):
    return TypeDecl(name, Kind.CLASS, lang, modifier, tuple(tparams), tuple(supers), tuple(methods))


def _st(target, *args: TypeRef):
    return SuperTypeRef(target, tuple(args))


def _m(name, params=(), ret: TypeRef = UNIT, kind=NORMAL, overrides=()):
    ps = tuple(ParamDecl(n, t) for n, t in params)
    refs = tuple(MethodRef(*r.split("::")) for r in overrides)
    return MethodDecl(name, ps, ret, kind, refs)


@dataclass(frozen=True)
class Fixture:
    name: str
    program: IrProgram
    varied: Lang
    bug: bool
    #: which compiler of the pair rejects ("earlier" or "latest"); None for controls
    rejecting: str | None = None
    message: str = ""
    #: mockc ``when`` clause describing the construct the buggy side trips on
    trigger: dict = field(default_factory=dict)
    mutator: str | None = None

    def mock_rules(self) -> tuple[dict, dict]:
        """Rule files for the ``(latest, earlier)`` mock compilers."""
        clean: dict = {"rules": []}
        buggy = {"rules": [{"when": self.trigger, "exit": 1, "output": self.message}]}
        if self.rejecting == "earlier":
            return clean, buggy
        if self.rejecting == "latest":
            return buggy, clean
        return clean, clean


def _p(*decls: TypeDecl) -> IrProgram:
    return IrProgram(tuple(decls))


# Kotlin class with a parent class and an interface that both declare func():
# the parent's is final, the interface's has a body.
FIG2 = _p(
    _cls("A", K, methods=[_m("foo", kind=FINAL)]),
    _iface("IB", K, methods=[_m("foo")]),
    _cls("C", K, Modifier.FINAL, supers=[_st("A"), _st("IB")]),
)

# Kotlin-Java-Kotlin chain where the Java class in the middle hides a conflict.
# The listing's ArrayList<Any> parameter is written as the top type.
FIG3 = _p(
    _iface("I0", K, methods=[_m("func", [("arg0", TOP)], kind=ABSTRACT)]),
    _iface("I1", K, supers=[_st("I0")], methods=[_m("func", [("arg0", TOP)], overrides=["I0::func"])]),
    _cls("A1", K, Modifier.ABSTRACT, supers=[_st("I0")],
         methods=[_m("func", [("arg0", TOP)], overrides=["I0::func"])]),
    _cls("A2", J, tparams=["T"], supers=[_st("A1"), _st("I1")]),
    _cls("A3", K, Modifier.FINAL, supers=[_st("A2", TOP), _st("I1"), _st("I0")]),
)

# Kotlin only: I1 reached with two different type arguments.
FIG6A = _p(
    _iface("I0", K),
    _iface("I1", K, tparams=["T0"], supers=[_st("I0")]),
    _iface("I2", K, supers=[_st("I1", ClassType("I0"))]),
    _cls("A2", K, Modifier.FINAL, supers=[_st("I2"), _st("I0"), _st("I1", ClassType("A2"))]),
)

# Scala only: A1.func claims to override but its first parameter differs.
FIG6B = _p(
    _cls("A0", S, Modifier.ABSTRACT, tparams=["T"],
         methods=[_m("func", [("arg0", ClassType("A0", (STRING,))), ("arg1", TypeParam("T"))], kind=ABSTRACT)]),
    _cls("A1", S, Modifier.ABSTRACT, supers=[_st("A0", STRING)],
         methods=[_m("func", [("arg0", ClassType("A0", (TOP,))), ("arg1", STRING)], overrides=["A0::func"])]),
)

# Java interfaces, Groovy class implementing both a generic interface and a
# sub-interface that supplies a default.
FIG7A = _p(
    _iface("A", J, tparams=["T"], methods=[_m("func", ret=TypeParam("T"), kind=ABSTRACT)]),
    _iface("B", J, supers=[_st("A", STRING)], methods=[_m("func", ret=STRING, overrides=["A::func"])]),
    _cls("C", G, supers=[_st("A", STRING), _st("B")]),
)

# The same with the type parameter removed; both Groovy versions accept it.
FIG7B = _p(
    _iface("A1", J, methods=[_m("func", ret=STRING, kind=ABSTRACT)]),
    _iface("B1", J, supers=[_st("A1")], methods=[_m("func", ret=STRING, overrides=["A1::func"])]),
    _cls("C1", G, supers=[_st("A1"), _st("B1")]),
)

# Five Java types and a Kotlin subclass that inherits a final method next to
# two defaults.
FIG8 = _p(
    _iface("ITop", J, methods=[_m("func")]),
    _iface("ISecondary", J, supers=[_st("ITop")], methods=[_m("func", overrides=["ITop::func"])]),
    _iface("IChild", J, supers=[_st("ISecondary"), _st("ITop")]),
    _cls("GrandParent", J, supers=[_st("ITop")], methods=[_m("func", kind=FINAL, overrides=["ITop::func"])]),
    _cls("Parent", J, supers=[_st("GrandParent"), _st("ISecondary")]),
    _cls("Child", K, Modifier.ABSTRACT, supers=[_st("Parent"), _st("IChild")]),
)

# Java abstract classes whose "override" only matches after erasure, with a
# Kotlin subclass.
FIG9 = _p(
    _cls("A0", J, Modifier.ABSTRACT, tparams=["T"],
         methods=[_m("func", [("arg0", ClassType("A0", (TOP,))), ("arg1", TypeParam("T"))], TOP, ABSTRACT)]),
    _cls("A1", J, Modifier.ABSTRACT, supers=[_st("A0", ClassType("A1"))],
         methods=[_m("func", [("arg0", ClassType("A0", (ClassType("A1"),))), ("arg1", ClassType("A1"))], TOP)]),
    _cls("A2", K, Modifier.FINAL, supers=[_st("A1")]),
)

# Groovy: final parent method next to an interface default.
FIG11 = _p(
    _cls("A", G, methods=[_m("func", kind=FINAL)]),
    _iface("I0", G, methods=[_m("func")]),
    _cls("B", G, supers=[_st("A"), _st("I0")]),
)

# Java interfaces and a Scala class reaching I0 as both I0[String] and
# I0[Object] after a type change.
FIG12 = _p(
    _iface("I0", J, tparams=["T"], methods=[_m("func", [("t", TypeParam("T"))], TypeParam("T"))]),
    _iface("I1", J, supers=[_st("I0", STRING)],
           methods=[_m("func", [("s", STRING)], STRING, overrides=["I0::func"])]),
    _cls("A0", S, Modifier.ABSTRACT, supers=[_st("I1"), _st("I0", TOP)],
         methods=[_m("func", [("s", TOP)], STRING, overrides=["I0::func", "I1::func"])]),
)


FIXTURES: dict[str, Fixture] = {
    f.name: f
    for f in (
        Fixture("fig2", FIG2, K, True, "earlier",
                "C.kt:1:1: error: class 'C' must override public open fun foo(): Unit defined in A "
                "because it inherits multiple interface methods of it",
                {"files_all": ["C.kt"], "contains": r"^class \w+ : \w+\(\), \w+"}),
        Fixture("fig3", FIG3, K, True, "earlier",
                "A3.kt:1:1: error: Class 'A3' must override public open fun func(arg0: Any?): Unit "
                "defined in A2 because it inherits multiple interface methods of it",
                {"files_all": ["A2.java", "A3.kt"], "contains": r"class A3 : A2<[^>]*>\(\), I1, I0"},
                mutator="FUNCTION_REMOVAL"),
        Fixture("fig6a", FIG6A, K, True, "earlier",
                "A2.kt:1:1: error: Type parameter T0 of 'I1' has inconsistent values: I0?, A2?\n"
                "INCONSISTENT_TYPE_PARAMETER_VALUES",
                {"contains": r"I1<I0\??>", "files_all": ["A2.kt"]}),
        Fixture("fig6b", FIG6B, S, True, "earlier",
                "A1.scala:2: error: method func overrides nothing.\n"
                "Note: the super classes of class A1 contain the following, non final members named func:\n"
                "def func(arg0: A0[String], arg1: String): Unit",
                {"contains": r"override def func\(arg0: A0\[AnyRef\]"}),
        Fixture("fig7a", FIG7A, G, True, "latest",
                "C.groovy: 1: Can't have an abstract method in a non-abstract class. The class 'C' must be "
                "declared abstract or the method 'java.lang.Object func()' must be implemented.\n"
                "1 error",
                {"files_any": ["C.groovy"], "contains": r"interface \w+<T\w*>"}),
        Fixture("fig7b", FIG7B, G, False),
        Fixture("fig8", FIG8, K, True, "earlier",
                "Child.kt:1:1: error: Class 'Child' must override 'func' because it inherits multiple "
                "implementations for it",
                {"files_all": ["Child.kt"], "contains": r"public final void func\(\)"}),
        Fixture("fig9", FIG9, K, True, "earlier",
                "A2.kt:1:1: error: Class 'A2' is not abstract and does not implement abstract base class "
                "member public abstract fun func(arg0: A0<Any?>?, arg1: A1?): Any? defined in A0",
                {"files_all": ["A2.kt"], "contains": r"extends A0<A1>"}),
        Fixture("fig11", FIG11, G, True, "latest",
                "B.groovy: 1: The method 'void func()' is already defined in class 'A' as final and "
                "cannot be overridden by the default method of 'I0'.\n1 error",
                {"files_any": ["B.groovy"], "contains": r"public final void func\(\)"},
                mutator="LANG_SHUFFLER"),
        Fixture("fig12", FIG12, S, True, "earlier",
                "A0.scala:1: error: illegal inheritance;\n"
                " class A0 inherits different type instances of trait I0:\nI0[Object] and I0[String]",
                {"contains": r"extends I1 with I0\[AnyRef\]"},
                mutator="TYPE_CHANGER"),
    )
}

BUG_FIXTURES = tuple(n for n, f in FIXTURES.items() if f.bug)
CONTROL_FIXTURES = tuple(n for n, f in FIXTURES.items() if not f.bug)


RAW_SOURCES: dict[str, dict[str, str]] = {
    # raw type List in a Java override, consumed by Kotlin
    "fig1": {
        "A.java": "import java.util.List;\n\npublic interface A<T> {\n    void foo(List<T> list);\n}\n",
        "B.java": (
            "import java.util.List;\n\npublic abstract class B implements A<String> {\n"
            "    @Override\n    public final void foo(List list) {}\n}\n"
        ),
        "C.java": "public class C extends B implements A<String> {}\n",
        "X.kt": "class X : C()\n",
    },
    # Kotlin's Nothing as a supertype argument, seen from Java
    "fig10": {
        "I0.kt": "interface I0<T0, T1> {\n    fun func(t1: T0)\n    fun func1(): T1\n}\n",
        "A0.kt": (
            "open class A0<T2> : I0<T2, Nothing> {\n    override fun func(t1: T2) {}\n"
            "    override fun func1(): Nothing = throw UnsupportedOperationException()\n}\n"
        ),
        "A1.java": "class A1 extends A0<String> {}\n",
    },
}


def fixture(name: str) -> Fixture:
    return FIXTURES[name]


__all__ = ["Fixture", "FIXTURES", "BUG_FIXTURES", "CONTROL_FIXTURES", "RAW_SOURCES", "fixture"]
